#include "fdbeam/barrier.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace fdbeam {

const char* to_string(SubStatus s) {
  switch (s) {
    case SubStatus::optimal: return "optimal";
    case SubStatus::max_iter: return "max_iter";
    case SubStatus::numerical_failure: return "numerical_failure";
    case SubStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

Eigen::MatrixXcd herm_basis(int n, int a) {
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
  if (a < n) {
    b(a, a) = 1.0;
    return b;
  }
  int p = a - n;
  const bool imag = p % 2 != 0;
  p /= 2;
  // p-th pair (i, j), i < j, row-major
  int i = 0;
  int remaining = p;
  while (remaining >= n - 1 - i) {
    remaining -= n - 1 - i;
    ++i;
  }
  const int j = i + 1 + remaining;
  if (imag) {
    b(i, j) = std::complex<double>(0.0, 1.0);
    b(j, i) = std::complex<double>(0.0, -1.0);
  } else {
    b(i, j) = 1.0;
    b(j, i) = 1.0;
  }
  return b;
}

Eigen::VectorXd herm_to_coords(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd z(herm_dim(n));
  for (int k = 0; k < n; ++k) z[k] = m(k, k).real();
  int idx = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      z[idx++] = m(i, j).real();
      z[idx++] = m(i, j).imag();
    }
  return z;
}

Eigen::MatrixXcd coords_to_herm(const Eigen::Ref<const Eigen::VectorXd>& z, int n) {
  Eigen::MatrixXcd m(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = z[k];
  int idx = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = std::complex<double>(z[idx], z[idx + 1]);
      m(j, i) = std::conj(m(i, j));
      idx += 2;
    }
  return m;
}

Eigen::VectorXd herm_grad_to_coords(const Eigen::MatrixXcd& g) {
  const int n = static_cast<int>(g.rows());
  Eigen::VectorXd v(herm_dim(n));
  for (int k = 0; k < n; ++k) v[k] = g(k, k).real();
  int idx = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      v[idx++] = 2.0 * g(i, j).real();
      v[idx++] = 2.0 * g(i, j).imag();
    }
  return v;
}

// --- LogDetAffineTerm -------------------------------------------------------

LogDetAffineTerm::LogDetAffineTerm(
    Eigen::MatrixXcd c, std::vector<std::pair<int, Eigen::MatrixXcd>> coeffs)
    : c_(std::move(c)), coeffs_(std::move(coeffs)) {}

Eigen::MatrixXcd LogDetAffineTerm::assemble(const Eigen::VectorXd& z) const {
  Eigen::MatrixXcd s = c_;
  for (const auto& [idx, d] : coeffs_) s += z[idx] * d;
  return s;
}

double LogDetAffineTerm::value(const Eigen::VectorXd& z) const {
  const Eigen::MatrixXcd s = assemble(z);
  Eigen::LLT<Eigen::MatrixXcd> llt(s);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < s.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    v += std::log(d);
  }
  return 2.0 * v;
}

bool LogDetAffineTerm::accumulate(const Eigen::VectorXd& z, double w, double& val,
                                  Eigen::VectorXd& grad,
                                  Eigen::MatrixXd& hess) const {
  const int n = static_cast<int>(c_.rows());
  const Eigen::MatrixXcd s = assemble(z);
  Eigen::LLT<Eigen::MatrixXcd> llt(s);
  if (llt.info() != Eigen::Success) return false;
  double logdet = 0.0;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < n; ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) return false;
    logdet += std::log(d);
  }
  val += w * 2.0 * logdet;

  const Eigen::MatrixXcd sinv = llt.solve(Eigen::MatrixXcd::Identity(n, n));
  const int m = static_cast<int>(coeffs_.size());
  // T_a = Sinv * D_a; grad_a = w tr(T_a); hess_ab = -w tr(T_a T_b).
  Eigen::MatrixXcd rows_t(m, n * n);   // row a = vec(T_a)
  Eigen::MatrixXcd rows_tt(m, n * n);  // row a = vec(T_a^T)
  for (int a = 0; a < m; ++a) {
    const Eigen::MatrixXcd t = sinv * coeffs_[a].second;
    grad[coeffs_[a].first] += w * t.trace().real();
    rows_t.row(a) = Eigen::Map<const Eigen::VectorXcd>(t.data(), n * n);
    const Eigen::MatrixXcd tt = t.transpose();
    rows_tt.row(a) = Eigen::Map<const Eigen::VectorXcd>(tt.data(), n * n);
  }
  const Eigen::MatrixXd block = (rows_t * rows_tt.transpose()).real();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      hess(coeffs_[a].first, coeffs_[b].first) -= w * block(a, b);
  return true;
}

// --- LogConcaveQuadTerm -----------------------------------------------------

LogConcaveQuadTerm::LogConcaveQuadTerm(SparseLin lin,
                                       std::vector<std::pair<int, double>> quad)
    : lin_(std::move(lin)), quad_(std::move(quad)) {}

double LogConcaveQuadTerm::slack(const Eigen::VectorXd& z) const {
  double s = lin_.eval(z);
  for (const auto& [idx, r] : quad_) s -= 0.5 * r * z[idx] * z[idx];
  return s;
}

double LogConcaveQuadTerm::value(const Eigen::VectorXd& z) const {
  const double s = slack(z);
  if (!(s > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(s);
}

bool LogConcaveQuadTerm::accumulate(const Eigen::VectorXd& z, double w, double& val,
                                    Eigen::VectorXd& grad,
                                    Eigen::MatrixXd& hess) const {
  const double s = slack(z);
  if (!(s > 0.0)) return false;
  val += w * std::log(s);
  // grad s: linear coefficients minus r*z on quadratic coordinates.
  // d(w log s) = w/s * ds;  d2 = -w/s^2 ds ds^T + w/s * d2s.
  auto for_each_grad = [&](auto&& fn) {
    for (const auto& [idx, c] : lin_.c) fn(idx, c);
    for (const auto& [idx, r] : quad_) fn(idx, -r * z[idx]);
  };
  for_each_grad([&](int idx, double ds) { grad[idx] += w / s * ds; });
  // rank-one part
  for_each_grad([&](int a, double da) {
    for_each_grad([&](int b, double db) { hess(a, b) -= w / (s * s) * da * db; });
  });
  for (const auto& [idx, r] : quad_) hess(idx, idx) -= w / s * r;
  return true;
}

bool AffineTerm::accumulate(const Eigen::VectorXd& z, double w, double& val,
                            Eigen::VectorXd& grad, Eigen::MatrixXd& /*hess*/) const {
  val += w * lin_.eval(z);
  for (const auto& [idx, c] : lin_.c) grad[idx] += w * c;
  return true;
}

// --- solver -----------------------------------------------------------------

double BarrierProblem::nu() const {
  double v = 0.0;
  for (const auto& b : barriers) v += b->nu();
  return v;
}

double BarrierProblem::objective_value(const Eigen::VectorXd& z) const {
  double v = 0.0;
  for (const auto& [term, w] : objective) {
    const double f = term->value(z);
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    v += w * f;
  }
  return v;
}

bool BarrierProblem::strictly_feasible(const Eigen::VectorXd& z) const {
  for (const auto& b : barriers)
    if (std::isnan(b->value(z))) return false;
  return !std::isnan(objective_value(z));
}

namespace {

// phi_t = t * objective + sum -log(slack). Returns NaN outside the domain.
double eval_phi(const BarrierProblem& prob, double t, const Eigen::VectorXd& z) {
  double v = 0.0;
  for (const auto& [term, w] : prob.objective) {
    const double f = term->value(z);
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    v += t * w * f;
  }
  for (const auto& b : prob.barriers) {
    const double f = b->value(z);
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    v -= f;
  }
  return v;
}

bool assemble(const BarrierProblem& prob, double t, const Eigen::VectorXd& z,
              double& val, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  val = 0.0;
  grad.setZero(prob.dim);
  hess.setZero(prob.dim, prob.dim);
  for (const auto& [term, w] : prob.objective)
    if (!term->accumulate(z, t * w, val, grad, hess)) return false;
  for (const auto& b : prob.barriers)
    if (!b->accumulate(z, -1.0, val, grad, hess)) return false;
  return true;
}

}  // namespace

BarrierResult solve_barrier(const BarrierProblem& prob, Eigen::VectorXd z0,
                            const SolverSettings& settings, std::ostream* debug) {
  BarrierResult res;
  res.z = z0;
  const double nu = prob.nu();
  if (prob.dim == 0) {
    res.status = SubStatus::optimal;
    res.objective = prob.objective_value(z0);
    res.t_final = 1.0;
    return res;
  }
  if (!prob.strictly_feasible(z0)) {
    res.status = SubStatus::infeasible;
    return res;
  }

  double t = std::max(1.0, nu / std::max(1.0, std::abs(prob.objective_value(z0))));
  Eigen::VectorXd z = std::move(z0);
  Eigen::VectorXd grad(prob.dim);
  Eigen::MatrixXd hess(prob.dim, prob.dim);
  double val = 0.0;
  int total_newton = 0;
  Eigen::VectorXd z_dual = z;
  double t_dual = t;
  bool have_dual = false;

  for (int stage = 0; stage < 200; ++stage) {
    // Center at the current t with damped Newton. phi differences at large t
    // sit below rounding, so progress is controlled through the decrement
    // alone; the damped step 1/(1+lambda) is the standard safe choice for
    // self-concordant barriers.
    bool centered = false;
    int stall = 0;
    double best_dec2 = std::numeric_limits<double>::infinity();
    double stage_dec2 = std::numeric_limits<double>::infinity();
    for (int it = 0; it < settings.max_newton_per_stage; ++it) {
      if (total_newton >= settings.max_newton_total) {
        res.z = z;
        res.objective = prob.objective_value(z);
        res.t_final = t;
        res.gap = nu / t;
        res.z_dual = have_dual ? z_dual : z;
        res.t_dual = have_dual ? t_dual : t;
        res.status = SubStatus::max_iter;
        res.newton_iters = total_newton;
        return res;
      }
      if (!assemble(prob, t, z, val, grad, hess)) {
        res.status = SubStatus::numerical_failure;
        res.newton_iters = total_newton;
        return res;
      }
      // Newton direction on the Jacobi-equilibrated system, with ridge
      // fallback and iterative refinement: the barrier Hessian spans many
      // orders of magnitude near the boundary and a raw factorization loses
      // the step entirely.
      Eigen::VectorXd step;
      const Eigen::VectorXd d =
          hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd hs = d.asDiagonal() * hess * d.asDiagonal();
      const Eigen::VectorXd gs = d.asDiagonal() * grad;
      double ridge = 0.0;
      for (;;) {
        Eigen::MatrixXd h = hs;
        if (ridge > 0.0) h.diagonal().array() += ridge;
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() == Eigen::Success) {
          Eigen::VectorXd y = llt.solve(-gs);
          for (int refine = 0; refine < 2; ++refine)
            y += llt.solve(-gs - hs * y);
          step = d.asDiagonal() * y;
          break;
        }
        ridge = ridge == 0.0 ? 1e-14 : ridge * 100.0;
        if (ridge > 1e3) {
          res.status = SubStatus::numerical_failure;
          res.newton_iters = total_newton;
          return res;
        }
      }
      const double decrement2 = -grad.dot(step);
      ++total_newton;
      if (!std::isfinite(decrement2) || decrement2 <= 0.0) {
        // Factorization noise produced a non-descent direction; end the
        // stage without any centering claim.
        stage_dec2 = std::numeric_limits<double>::infinity();
        break;
      }
      stage_dec2 = decrement2;
      if (decrement2 / 2.0 <= settings.newton_tol) {
        centered = true;
        break;
      }
      // Essentially no decrement progress for several steps: the stage is at
      // its numerical floor; the termination test accounts for the residual.
      if (decrement2 < 0.999 * best_dec2) {
        best_dec2 = std::min(best_dec2, decrement2);
        stall = 0;
      } else if (++stall >= 8) {
        break;
      }

      // Armijo backtracking while phi differences are representable; once the
      // predicted decrease sinks below rounding, fall back to the largest
      // feasible step (progress is then tracked by the decrement alone).
      const double slope = grad.dot(step);
      const double noise = 8.0 * 2.2e-16 * std::abs(val);
      double alpha = 1.0;
      bool moved = false;
      if (-slope > noise) {
        for (int ls = 0; ls < 60; ++ls) {
          const Eigen::VectorXd cand = z + alpha * step;
          const double phi = eval_phi(prob, t, cand);
          if (!std::isnan(phi) &&
              (phi <= val + 0.25 * alpha * slope ||
               (-alpha * slope < noise && phi <= val + noise))) {
            z = cand;
            moved = true;
            break;
          }
          alpha *= 0.5;
        }
      } else {
        for (int ls = 0; ls < 60; ++ls) {
          if (prob.strictly_feasible(z + alpha * step)) {
            z += alpha * step;
            moved = true;
            break;
          }
          alpha *= 0.5;
        }
      }
      if (debug != nullptr && settings.verbosity > 0)
        (*debug) << "newton t=" << t << " gap=" << nu / t
                 << " dec2=" << decrement2 << " alpha=" << (moved ? alpha : 0.0)
                 << "\n";
      if (!moved) break;  // stalled; accept current center
    }

    if (centered) {
      z_dual = z;
      t_dual = t;
      have_dual = true;
    }
    const double f = prob.objective_value(z);
    // Suboptimality certificate at an imperfectly centered point: the
    // residual decrement inflates the plain nu/t bound.
    const double gap_eff =
        (nu + std::sqrt(std::max(0.0, stage_dec2) * nu) + stage_dec2 / 2.0) / t;
    if (gap_eff <= std::min(settings.gap_tol_rel * std::max(1.0, std::abs(f)),
                            settings.gap_tol_abs)) {
      res.z = z;
      res.objective = f;
      res.t_final = t;
      res.gap = gap_eff;
      res.z_dual = have_dual ? z_dual : z;
      res.t_dual = have_dual ? t_dual : t;
      res.status = SubStatus::optimal;
      res.newton_iters = total_newton;
      return res;
    }
    t *= settings.barrier_growth;
  }
  res.z = z;
  res.objective = prob.objective_value(z);
  res.t_final = t;
  res.gap = nu / t;
  res.z_dual = have_dual ? z_dual : z;
  res.t_dual = have_dual ? t_dual : t;
  res.status = SubStatus::max_iter;
  res.newton_iters = total_newton;
  return res;
}

}  // namespace fdbeam
