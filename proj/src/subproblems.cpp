#include "fdbeam/subproblems.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace fdbeam {

namespace {

// Both subproblems are solved in normalized units: DL covariances in units of
// P_BS, UL powers in units of q_bar_j, channels scaled so both noise powers
// are 1. Objective values are unchanged by the normalization (the noise
// constants cancel between the h and g parts); duals are scaled back on exit.
struct Scaled {
  std::vector<Eigen::VectorXcd> h_dl;  // sqrt(P/sigma_dl^2) h_Di
  std::vector<Eigen::VectorXcd> h_ul;  // sqrt(qbar_j/sigma_bs^2) h_Uj
  Eigen::MatrixXd g2;                  // qbar_j/sigma_dl^2 |g_ji|^2
  Eigen::MatrixXcd h_si;               // sqrt(P/sigma_bs^2) H_SI
  int n_tx, n_rx, k_dl, k_ul;
};

Scaled scale_channels(const ChannelSet& ch, double p_bs, const Eigen::VectorXd& q_bar) {
  Scaled s;
  s.n_tx = ch.n_tx();
  s.n_rx = ch.n_rx();
  s.k_dl = ch.k_dl();
  s.k_ul = ch.k_ul();
  const double dl_scale = std::sqrt(p_bs / ch.sigma_n2_dl);
  for (const auto& h : ch.h_dl) s.h_dl.push_back(dl_scale * h);
  for (int j = 0; j < s.k_ul; ++j)
    s.h_ul.push_back(std::sqrt(q_bar[j] / ch.sigma_n2_bs) * ch.h_ul[j]);
  s.g2.resize(s.k_ul, s.k_dl);
  for (int j = 0; j < s.k_ul; ++j)
    for (int i = 0; i < s.k_dl; ++i)
      s.g2(j, i) = q_bar[j] / ch.sigma_n2_dl * std::norm(ch.g_cci(j, i));
  s.h_si = std::sqrt(p_bs / ch.sigma_n2_bs) * ch.h_si;
  return s;
}

struct Layout {
  int n_tx = 0, k_dl = 0, k_ul = 0;
  int q_block(int i) const { return i * herm_dim(n_tx); }
  int q_ul(int j) const { return k_dl * herm_dim(n_tx) + j; }
  int base_dim() const { return k_dl * herm_dim(n_tx) + k_ul; }
  // SPCA extension
  int t_dl(int i) const { return base_dim() + i; }
  int t_ul(int j) const { return base_dim() + k_dl + j; }
  int beta(int i) const { return base_dim() + k_dl + k_ul + i; }
  int x_ul(int j) const { return base_dim() + 2 * k_dl + k_ul + j; }
  int spca_dim() const { return base_dim() + 2 * k_dl + 2 * k_ul; }
};

// Scaled design in normalized units plus the coordinate vector.
struct ScaledExpansion {
  std::vector<Eigen::MatrixXcd> q;  // Q / P
  Eigen::VectorXd q_ul;             // q / q_bar
};

ScaledExpansion scale_expansion(const Design& d, double p_bs,
                                const Eigen::VectorXd& q_bar) {
  ScaledExpansion se;
  for (const auto& q : d.q_dl) se.q.push_back(q / p_bs);
  se.q_ul.resize(d.k_ul());
  for (int j = 0; j < d.k_ul(); ++j) se.q_ul[j] = d.q_ul[j] / q_bar[j];
  return se;
}

// Strictly interior version of an expansion point: eigenvalue floor on the
// covariances (a multiplicative shrink cannot restore positive definiteness
// of a singular matrix), budget margin, box clamping.
void make_interior(ScaledExpansion& se, int n_tx, int k_dl) {
  if (k_dl > 0) {
    const double floor = 1e-8 / (k_dl * n_tx);
    double total = 0.0;
    for (auto& q : se.q) {
      q = 0.5 * (q + q.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(q);
      Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(floor);
      q = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().adjoint();
      total += ev.sum();
    }
    if (total > 1.0 - 1e-7) {
      const double shrink = (1.0 - 1e-6) / total;
      for (auto& q : se.q) q *= shrink;
    }
  }
  for (int j = 0; j < se.q_ul.size(); ++j)
    se.q_ul[j] = std::min(std::max(se.q_ul[j], 1e-13), 1.0 - 1e-9);
}

Eigen::VectorXd pack_base(const ScaledExpansion& se, const Layout& lay, int dim) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < lay.k_dl; ++i)
    z.segment(lay.q_block(i), herm_dim(lay.n_tx)) = herm_to_coords(se.q[i]);
  for (int j = 0; j < lay.k_ul; ++j) z[lay.q_ul(j)] = se.q_ul[j];
  return z;
}

// Coefficient list of the UL covariance I + sum H Q H^H + sum q h h^H.
std::vector<std::pair<int, Eigen::MatrixXcd>> ul_cov_coeffs(const Scaled& s,
                                                            const Layout& lay,
                                                            bool with_q_ul) {
  std::vector<std::pair<int, Eigen::MatrixXcd>> coeffs;
  for (int i = 0; i < lay.k_dl; ++i)
    for (int a = 0; a < herm_dim(lay.n_tx); ++a)
      coeffs.emplace_back(lay.q_block(i) + a,
                          s.h_si * herm_basis(lay.n_tx, a) * s.h_si.adjoint());
  if (with_q_ul)
    for (int j = 0; j < lay.k_ul; ++j)
      coeffs.emplace_back(lay.q_ul(j),
                          (s.h_ul[j] * s.h_ul[j].adjoint()).eval());
  return coeffs;
}

// Linear coordinates of 1 + sum_k h_i^H Q_k h_i + sum_j q_j |g_ji|^2
// (optionally excluding k == i).
SparseLin dl_power_lin(const Scaled& s, const Layout& lay, int i, bool exclude_self) {
  SparseLin lin;
  lin.c0 = 1.0;
  const Eigen::VectorXd coords = herm_grad_to_coords(
      (s.h_dl[i] * s.h_dl[i].adjoint()).eval());
  for (int k = 0; k < lay.k_dl; ++k) {
    if (exclude_self && k == i) continue;
    for (int a = 0; a < herm_dim(lay.n_tx); ++a)
      if (coords[a] != 0.0) lin.c.emplace_back(lay.q_block(k) + a, coords[a]);
  }
  for (int j = 0; j < lay.k_ul; ++j)
    if (s.g2(j, i) != 0.0) lin.c.emplace_back(lay.q_ul(j), s.g2(j, i));
  return lin;
}

void add_power_barriers(BarrierProblem& prob, const Layout& lay) {
  // PSD cones
  for (int i = 0; i < lay.k_dl; ++i) {
    std::vector<std::pair<int, Eigen::MatrixXcd>> coeffs;
    for (int a = 0; a < herm_dim(lay.n_tx); ++a)
      coeffs.emplace_back(lay.q_block(i) + a, herm_basis(lay.n_tx, a));
    prob.barriers.push_back(std::make_shared<LogDetAffineTerm>(
        Eigen::MatrixXcd::Zero(lay.n_tx, lay.n_tx), std::move(coeffs)));
  }
  // sum tr(Q) <= 1
  if (lay.k_dl > 0) {
    SparseLin budget;
    budget.c0 = 1.0;
    for (int i = 0; i < lay.k_dl; ++i)
      for (int k = 0; k < lay.n_tx; ++k)
        budget.c.emplace_back(lay.q_block(i) + k, -1.0);
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(std::move(budget)));
  }
  // 0 <= q <= 1
  for (int j = 0; j < lay.k_ul; ++j) {
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{0.0, {{lay.q_ul(j), 1.0}}}));
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{1.0, {{lay.q_ul(j), -1.0}}}));
  }
}

// Scaled per-user interference 1 + sum_{k!=i} + CCI at a scaled design.
double theta_scaled(const Scaled& s, int i, const ScaledExpansion& se) {
  double v = 1.0;
  for (int k = 0; k < s.k_dl; ++k)
    if (k != i) v += s.h_dl[i].dot(se.q[k] * s.h_dl[i]).real();
  for (int j = 0; j < s.k_ul; ++j) v += se.q_ul[j] * s.g2(j, i);
  return v;
}

double signal_scaled(const Scaled& s, int i, const ScaledExpansion& se) {
  return theta_scaled(s, i, se) + s.h_dl[i].dot(se.q[i] * s.h_dl[i]).real();
}

Eigen::MatrixXcd si_cov_scaled(const Scaled& s, const ScaledExpansion& se) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(s.n_rx, s.n_rx);
  for (int i = 0; i < s.k_dl; ++i) m += s.h_si * se.q[i] * s.h_si.adjoint();
  return m;
}

Eigen::MatrixXcd sic_cov_scaled(const Scaled& s, int j, const ScaledExpansion& se) {
  Eigen::MatrixXcd m = si_cov_scaled(s, se);
  for (int mm = j + 1; mm < s.k_ul; ++mm)
    m += se.q_ul[mm] * s.h_ul[mm] * s.h_ul[mm].adjoint();
  return m;
}

double logdet_chol(const Eigen::MatrixXcd& m) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  double v = 0.0;
  for (int i = 0; i < m.rows(); ++i) v += std::log(llt.matrixLLT()(i, i).real());
  return 2.0 * v;
}

// Duals of the shared power constraints from the final barrier state.
void extract_power_duals(SubproblemResult& out, const Eigen::VectorXd& z,
                         const Layout& lay, double t_final, double p_bs,
                         const Eigen::VectorXd& q_bar) {
  out.lambda_lo.resize(lay.k_ul);
  out.lambda_hi.resize(lay.k_ul);
  for (int j = 0; j < lay.k_ul; ++j) {
    const double qj = z[lay.q_ul(j)];
    out.lambda_lo[j] = 1.0 / (t_final * qj) / q_bar[j];
    out.lambda_hi[j] = 1.0 / (t_final * (1.0 - qj)) / q_bar[j];
  }
  if (lay.k_dl > 0) {
    double total = 0.0;
    for (int i = 0; i < lay.k_dl; ++i)
      for (int k = 0; k < lay.n_tx; ++k) total += z[lay.q_block(i) + k];
    out.mu = 1.0 / (t_final * (1.0 - total)) / p_bs;
    out.z_dual.clear();
    for (int i = 0; i < lay.k_dl; ++i) {
      const Eigen::MatrixXcd q =
          coords_to_herm(z.segment(lay.q_block(i), herm_dim(lay.n_tx)), lay.n_tx);
      Eigen::LLT<Eigen::MatrixXcd> llt(q);
      out.z_dual.push_back(
          llt.solve(Eigen::MatrixXcd::Identity(lay.n_tx, lay.n_tx)) /
          (t_final * p_bs));
    }
  }
}

Design unscale_design(const Eigen::VectorXd& z, const Layout& lay, double p_bs,
                      const Eigen::VectorXd& q_bar) {
  Design d;
  for (int i = 0; i < lay.k_dl; ++i)
    d.q_dl.push_back(
        p_bs * coords_to_herm(z.segment(lay.q_block(i), herm_dim(lay.n_tx)), lay.n_tx));
  d.q_ul.resize(lay.k_ul);
  for (int j = 0; j < lay.k_ul; ++j) d.q_ul[j] = q_bar[j] * z[lay.q_ul(j)];
  return d;
}

}  // namespace

// --- MAXDET -----------------------------------------------------------------

MaxdetSubproblem MaxdetSubproblem::build(const ChannelSet& ch, const Design& expansion,
                                         double p_bs, const Eigen::VectorXd& q_bar) {
  MaxdetSubproblem sub;
  sub.channels = &ch;
  sub.expansion = expansion;
  sub.p_bs = p_bs;
  sub.q_bar = q_bar;
  sub.theta_dl.resize(ch.k_dl());
  for (int i = 0; i < ch.k_dl(); ++i)
    sub.theta_dl[i] = dl_interference(i, ch, expansion);
  sub.theta_si = si_covariance(ch, expansion);
  return sub;
}

SubproblemResult solve_maxdet(const MaxdetSubproblem& sub,
                              const SolverSettings& settings, std::ostream* debug) {
  const ChannelSet& ch = *sub.channels;
  const Scaled s = scale_channels(ch, sub.p_bs, sub.q_bar);
  Layout lay{s.n_tx, s.k_dl, s.k_ul};

  BarrierProblem prob;
  prob.dim = lay.base_dim();

  // Objective (minimized): -(h - g_n).
  prob.objective.emplace_back(
      std::make_shared<LogDetAffineTerm>(
          Eigen::MatrixXcd::Identity(s.n_rx, s.n_rx), ul_cov_coeffs(s, lay, true)),
      -1.0);
  for (int i = 0; i < lay.k_dl; ++i)
    prob.objective.emplace_back(
        std::make_shared<LogConcaveQuadTerm>(dl_power_lin(s, lay, i, false)), -1.0);

  // Affine majorization of g around the expansion (scaled units).
  ScaledExpansion exp_sc = scale_expansion(sub.expansion, sub.p_bs, sub.q_bar);
  {
    const Eigen::MatrixXcd theta_inv_si = [&] {
      Eigen::LLT<Eigen::MatrixXcd> llt(si_cov_scaled(s, exp_sc));
      return llt.solve(Eigen::MatrixXcd::Identity(s.n_rx, s.n_rx)).eval();
    }();
    const Eigen::MatrixXcd si_slope = s.h_si.adjoint() * theta_inv_si * s.h_si;
    Eigen::VectorXd theta(lay.k_dl);
    double g_exp = logdet_chol(si_cov_scaled(s, exp_sc));
    for (int i = 0; i < lay.k_dl; ++i) {
      theta[i] = theta_scaled(s, i, exp_sc);
      g_exp += std::log(theta[i]);
    }
    SparseLin lin;
    lin.c0 = g_exp;
    for (int k = 0; k < lay.k_dl; ++k) {
      Eigen::MatrixXcd slope = si_slope;
      for (int i = 0; i < lay.k_dl; ++i)
        if (i != k) slope += s.h_dl[i] * s.h_dl[i].adjoint() / theta[i];
      const Eigen::VectorXd coords = herm_grad_to_coords(slope);
      const Eigen::VectorXd z_exp = herm_to_coords(exp_sc.q[k]);
      lin.c0 -= coords.dot(z_exp);
      for (int a = 0; a < coords.size(); ++a)
        if (coords[a] != 0.0) lin.c.emplace_back(lay.q_block(k) + a, coords[a]);
    }
    for (int j = 0; j < lay.k_ul; ++j) {
      double slope = 0.0;
      for (int i = 0; i < lay.k_dl; ++i) slope += s.g2(j, i) / theta[i];
      lin.c0 -= slope * exp_sc.q_ul[j];
      if (slope != 0.0) lin.c.emplace_back(lay.q_ul(j), slope);
    }
    prob.objective.emplace_back(std::make_shared<AffineTerm>(std::move(lin)), 1.0);
  }

  add_power_barriers(prob, lay);

  make_interior(exp_sc, lay.n_tx, lay.k_dl);
  const Eigen::VectorXd z0 = pack_base(exp_sc, lay, prob.dim);

  const BarrierResult br = solve_barrier(prob, z0, settings, debug);

  SubproblemResult out;
  out.status = br.status;
  out.newton_iters = br.newton_iters;
  if (br.status == SubStatus::infeasible ||
      br.status == SubStatus::numerical_failure)
    return out;
  out.objective = -br.objective;
  out.design = unscale_design(br.z, lay, sub.p_bs, sub.q_bar);
  hermitize(out.design);
  extract_power_duals(out, br.z_dual, lay, br.t_dual, sub.p_bs, sub.q_bar);
  return out;
}

// --- SPCA -------------------------------------------------------------------

double g_sinr_core(int j, double x, const ChannelSet& ch, const Design& d) {
  const Eigen::MatrixXcd cov = ul_sic_covariance(j, ch, d);
  Eigen::LLT<Eigen::MatrixXcd> llt(cov);
  return x * x * ch.h_ul[j].dot(llt.solve(ch.h_ul[j])).real();
}

SpcaSubproblem SpcaSubproblem::build(const ChannelSet& ch, const Design& expansion,
                                     const Eigen::VectorXd& x_exp,
                                     const Eigen::VectorXd& psi, double p_bs,
                                     const Eigen::VectorXd& q_bar) {
  if (psi.size() != ch.k_dl() || (psi.size() > 0 && psi.minCoeff() <= 0.0))
    throw std::invalid_argument("SpcaSubproblem: psi must be positive");
  if (x_exp.size() != ch.k_ul())
    throw std::invalid_argument("SpcaSubproblem: x_exp size mismatch");
  SpcaSubproblem sub;
  sub.channels = &ch;
  sub.p_bs = p_bs;
  sub.q_bar = q_bar;
  sub.expansion = expansion;
  sub.x_exp = x_exp;
  sub.psi = psi;
  for (int j = 0; j < ch.k_ul(); ++j) {
    const Eigen::MatrixXcd cov = ul_sic_covariance(j, ch, expansion);
    Eigen::LLT<Eigen::MatrixXcd> llt(cov);
    const Eigen::VectorXcd w = llt.solve(ch.h_ul[j]);  // X^-1 h
    sub.x_cov.push_back(cov);
    sub.g_exp.conservativeResize(j + 1);
    sub.g_slope_x.conservativeResize(j + 1);
    const double core = ch.h_ul[j].dot(w).real();
    sub.g_exp[j] = x_exp[j] * x_exp[j] * core;
    sub.g_slope_x[j] = 2.0 * x_exp[j] * core;
    sub.g_slope_xcov.push_back(x_exp[j] * x_exp[j] * w * w.adjoint());
  }
  return sub;
}

double g_linearized(const SpcaSubproblem& sub, int j, double x, const Design& d) {
  const Eigen::MatrixXcd x_now = ul_sic_covariance(j, *sub.channels, d);
  const double lin =
      sub.g_exp[j] + sub.g_slope_x[j] * (x - sub.x_exp[j]) -
      (sub.g_slope_xcov[j] * (x_now - sub.x_cov[j])).trace().real();
  return -lin;
}

SubproblemResult solve_spca(const SpcaSubproblem& sub,
                            const SolverSettings& settings, std::ostream* debug) {
  const ChannelSet& ch = *sub.channels;
  const Scaled s = scale_channels(ch, sub.p_bs, sub.q_bar);
  Layout lay{s.n_tx, s.k_dl, s.k_ul};

  // Scaled expansion: exp_lin is the linearization point, exp_int the
  // pulled-inward copy the solve starts from.
  const ScaledExpansion exp_lin = scale_expansion(sub.expansion, sub.p_bs, sub.q_bar);
  ScaledExpansion exp_int = exp_lin;
  make_interior(exp_int, lay.n_tx, lay.k_dl);

  Eigen::VectorXd psi_sc(lay.k_dl);  // psi in units of 1/sigma_dl^2
  for (int i = 0; i < lay.k_dl; ++i) psi_sc[i] = sub.psi[i] * ch.sigma_n2_dl;
  Eigen::VectorXd x_sc(lay.k_ul);
  for (int j = 0; j < lay.k_ul; ++j) {
    // Floor keeps the linearized SIC constraint from pinning t to exactly 1
    // when a user's power has hit zero.
    x_sc[j] = std::max(sub.x_exp[j] / std::sqrt(sub.q_bar[j]), 1e-7);
  }

  // SIC linearization constants at the expansion.
  std::vector<Eigen::MatrixXcd> sic_p(lay.k_ul);
  Eigen::VectorXd sic_c0(lay.k_ul), sic_slope(lay.k_ul);
  for (int j = 0; j < lay.k_ul; ++j) {
    const Eigen::MatrixXcd x_cov_sc = sic_cov_scaled(s, j, exp_lin);
    Eigen::LLT<Eigen::MatrixXcd> llt(x_cov_sc);
    const Eigen::VectorXcd w = llt.solve(s.h_ul[j]);
    const double core = s.h_ul[j].dot(w).real();
    const double g_exp = x_sc[j] * x_sc[j] * core;
    sic_slope[j] = 2.0 * x_sc[j] * core;
    sic_p[j] = x_sc[j] * x_sc[j] * w * w.adjoint();
    // constant of slack = 1 - t_U - G
    sic_c0[j] = 1.0 + g_exp - sic_slope[j] * x_sc[j] +
                (sic_p[j] * x_cov_sc).trace().real() - sic_p[j].trace().real();
  }

  // --- start point and degenerate-user detection ----------------------------
  // A user whose admissible rate interval has collapsed to solver precision
  // (the algorithm drove it to zero rate) is frozen: its epigraph variable is
  // pinned at 1, its constraints leave the model and its power coordinates
  // are pinned at the carried values. The carried point stays feasible, so
  // the outer iteration continues monotonically.
  constexpr double kFreezeWidth = 1e-11;
  std::vector<bool> frozen_dl(lay.k_dl, false), frozen_ul(lay.k_ul, false);
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(lay.spca_dim());
  z0.head(lay.base_dim()) = pack_base(exp_int, lay, lay.base_dim());
  for (int j = 0; j < lay.k_ul; ++j) {
    const double q_sqrt = std::sqrt(exp_int.q_ul[j]);
    z0[lay.x_ul(j)] = std::min(std::max(x_sc[j], 1e-8), q_sqrt * (1.0 - 1e-7));
  }
  for (int i = 0; i < lay.k_dl; ++i) {
    const double theta0 = theta_scaled(s, i, exp_int);
    const double sig0 = signal_scaled(s, i, exp_int);
    // beta must leave room for t > 1 in the F constraint:
    // psi beta^2 / 2 < sig - 1/(2 psi).
    const double ceiling2 =
        2.0 * sig0 / psi_sc[i] - 1.0 / (psi_sc[i] * psi_sc[i]);
    const double beta_ceiling = ceiling2 > 0.0 ? std::sqrt(ceiling2) : 0.0;
    if (beta_ceiling <= theta0 * (1.0 + 1e-15)) {
      frozen_dl[i] = true;
      z0[lay.beta(i)] = std::max(theta0, 1.0);
      z0[lay.t_dl(i)] = 1.0;
      continue;
    }
    const double beta0 = theta0 + 0.25 * (beta_ceiling - theta0);
    const double room = sig0 - psi_sc[i] * beta0 * beta0 / 2.0;
    const double t_max = std::sqrt(std::max(0.0, 2.0 * psi_sc[i] * room));
    if (t_max <= 1.0 + kFreezeWidth) {
      frozen_dl[i] = true;
      z0[lay.beta(i)] = std::max(theta0, 1.0);
      z0[lay.t_dl(i)] = 1.0;
      continue;
    }
    z0[lay.beta(i)] = beta0;
    z0[lay.t_dl(i)] = 1.0 + 0.5 * (t_max - 1.0);
  }
  for (int j = 0; j < lay.k_ul; ++j) {
    // With t_U still 0, the constraint slack equals 1 - G at the start point,
    // which is the admissible ceiling for t_U.
    double t_max = sic_c0[j] + sic_slope[j] * z0[lay.x_ul(j)];
    for (int m = j + 1; m < lay.k_ul; ++m)
      t_max -= z0[lay.q_ul(m)] * s.h_ul[m].dot(sic_p[j] * s.h_ul[m]).real();
    const Eigen::MatrixXcd q_slope = s.h_si.adjoint() * sic_p[j] * s.h_si;
    for (int i = 0; i < lay.k_dl; ++i)
      t_max -= herm_grad_to_coords(q_slope)
                   .dot(z0.segment(lay.q_block(i), herm_dim(lay.n_tx)));
    if (t_max <= 1.0 + kFreezeWidth) {
      frozen_ul[j] = true;
      z0[lay.t_ul(j)] = 1.0;
    } else {
      z0[lay.t_ul(j)] = 1.0 + 0.5 * (t_max - 1.0);
    }
  }

  // --- assemble the barrier problem ------------------------------------------
  BarrierProblem prob;
  prob.dim = lay.spca_dim();
  auto pin = [&prob, &z0](int idx, double width) {
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{-(z0[idx] - width), {{idx, 1.0}}}));
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{z0[idx] + width, {{idx, -1.0}}}));
  };

  for (int i = 0; i < lay.k_dl; ++i)
    if (!frozen_dl[i])
      prob.objective.emplace_back(std::make_shared<LogConcaveQuadTerm>(
                                      SparseLin{0.0, {{lay.t_dl(i), 1.0}}}),
                                  -1.0);
  for (int j = 0; j < lay.k_ul; ++j)
    if (!frozen_ul[j])
      prob.objective.emplace_back(std::make_shared<LogConcaveQuadTerm>(
                                      SparseLin{0.0, {{lay.t_ul(j), 1.0}}}),
                                  -1.0);

  // PSD cones and the BS budget. Frozen UL powers are pinned instead of boxed.
  for (int i = 0; i < lay.k_dl; ++i) {
    std::vector<std::pair<int, Eigen::MatrixXcd>> coeffs;
    for (int a = 0; a < herm_dim(lay.n_tx); ++a)
      coeffs.emplace_back(lay.q_block(i) + a, herm_basis(lay.n_tx, a));
    prob.barriers.push_back(std::make_shared<LogDetAffineTerm>(
        Eigen::MatrixXcd::Zero(lay.n_tx, lay.n_tx), std::move(coeffs)));
  }
  if (lay.k_dl > 0) {
    SparseLin budget;
    budget.c0 = 1.0;
    for (int i = 0; i < lay.k_dl; ++i)
      for (int k = 0; k < lay.n_tx; ++k)
        budget.c.emplace_back(lay.q_block(i) + k, -1.0);
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(std::move(budget)));
  }
  for (int j = 0; j < lay.k_ul; ++j) {
    if (frozen_ul[j]) {
      pin(lay.q_ul(j), std::min(1e-7, 0.5 * z0[lay.q_ul(j)]));
      pin(lay.x_ul(j), std::min(1e-7, 0.5 * z0[lay.x_ul(j)]));
      pin(lay.t_ul(j), 1e-6);
      continue;
    }
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{0.0, {{lay.q_ul(j), 1.0}}}));
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{1.0, {{lay.q_ul(j), -1.0}}}));
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{-1.0, {{lay.t_ul(j), 1.0}}}));
    // q_j >= x_j^2
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{0.0, {{lay.q_ul(j), 1.0}}},
        std::vector<std::pair<int, double>>{{lay.x_ul(j), 2.0}}));
    // linearized SIC constraint: G(x, Q, q) <= 1 - t_U
    SparseLin lin;
    lin.c0 = sic_c0[j];
    lin.c.emplace_back(lay.t_ul(j), -1.0);
    lin.c.emplace_back(lay.x_ul(j), sic_slope[j]);
    for (int m = j + 1; m < lay.k_ul; ++m)
      lin.c.emplace_back(lay.q_ul(m), -s.h_ul[m].dot(sic_p[j] * s.h_ul[m]).real());
    const Eigen::MatrixXcd q_slope = s.h_si.adjoint() * sic_p[j] * s.h_si;
    const Eigen::VectorXd coords = herm_grad_to_coords(q_slope);
    for (int i = 0; i < lay.k_dl; ++i)
      for (int a = 0; a < coords.size(); ++a)
        if (coords[a] != 0.0) lin.c.emplace_back(lay.q_block(i) + a, -coords[a]);
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(std::move(lin)));
  }
  for (int i = 0; i < lay.k_dl; ++i) {
    if (frozen_dl[i]) {
      pin(lay.t_dl(i), 1e-6);
      pin(lay.beta(i), 1e-6 * std::max(1.0, z0[lay.beta(i)]));
      continue;
    }
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(
        SparseLin{-1.0, {{lay.t_dl(i), 1.0}}}));
    // F-surrogate: signal >= t^2/(2 psi) + psi beta^2/2
    SparseLin flin = dl_power_lin(s, lay, i, false);
    std::vector<std::pair<int, double>> quad{{lay.t_dl(i), 1.0 / psi_sc[i]},
                                             {lay.beta(i), psi_sc[i]}};
    prob.barriers.push_back(
        std::make_shared<LogConcaveQuadTerm>(std::move(flin), std::move(quad)));
    // soft interference threshold: theta_i(Q, q) <= beta_i
    const SparseLin theta_lin = dl_power_lin(s, lay, i, true);
    SparseLin lin;
    lin.c0 = -theta_lin.c0;
    for (const auto& [idx, c] : theta_lin.c) lin.c.emplace_back(idx, -c);
    lin.c.emplace_back(lay.beta(i), 1.0);
    prob.barriers.push_back(std::make_shared<LogConcaveQuadTerm>(std::move(lin)));
  }

  SubproblemResult out;
  const BarrierResult br = solve_barrier(prob, z0, settings, debug);
  out.status = br.status;
  out.newton_iters = br.newton_iters;
  if (br.status == SubStatus::infeasible ||
      br.status == SubStatus::numerical_failure)
    return out;
  out.objective = -br.objective;
  out.design = unscale_design(br.z, lay, sub.p_bs, sub.q_bar);
  hermitize(out.design);
  out.t_dl.resize(lay.k_dl);
  out.beta_dl.resize(lay.k_dl);
  for (int i = 0; i < lay.k_dl; ++i) {
    if (frozen_dl[i]) {
      // True epigraph value at the frozen point; keeps the reported objective
      // a continuation of the previous iterate's.
      const double theta = theta_scaled(s, i, exp_lin);
      out.t_dl[i] = signal_scaled(s, i, exp_lin) / theta;
      out.beta_dl[i] = theta * ch.sigma_n2_dl;
      out.objective += std::log(out.t_dl[i]);
      continue;
    }
    out.t_dl[i] = br.z[lay.t_dl(i)];
    out.beta_dl[i] = br.z[lay.beta(i)] * ch.sigma_n2_dl;
  }
  out.t_ul.resize(lay.k_ul);
  out.x_ul.resize(lay.k_ul);
  for (int j = 0; j < lay.k_ul; ++j) {
    if (frozen_ul[j]) {
      const double core = sic_slope[j] / (2.0 * x_sc[j]);
      out.t_ul[j] = 1.0 + x_sc[j] * x_sc[j] * core;
      out.x_ul[j] = br.z[lay.x_ul(j)] * std::sqrt(sub.q_bar[j]);
      out.objective += std::log(out.t_ul[j]);
      continue;
    }
    out.t_ul[j] = br.z[lay.t_ul(j)];
    out.x_ul[j] = br.z[lay.x_ul(j)] * std::sqrt(sub.q_bar[j]);
  }
  extract_power_duals(out, br.z_dual, lay, br.t_dual, sub.p_bs, sub.q_bar);
  // Recover the PSD-cone dual of the design problem from the subproblem dual:
  // when the bound t_k >= 1 is active its multiplier enters the Q_k
  // stationarity through the F constraint; fold it back so the reported Z
  // matches the design problem's geometry.
  for (int k = 0; k < lay.k_dl; ++k) {
    if (frozen_dl[k]) continue;
    const double t_k = br.z_dual[lay.t_dl(k)];
    const double kappa = 1.0 / (br.t_dual * (t_k - 1.0));
    out.z_dual[k] += kappa * psi_sc[k] / (t_k * ch.sigma_n2_dl) *
                     (ch.h_dl[k] * ch.h_dl[k].adjoint());
  }
  // Convergence substitution for the SIC linearization: the subproblem's Z
  // balances coefficients frozen at the expansion; replace them by their
  // values at the returned design (no-op at an exact fixed point).
  for (int j = 0; j < lay.k_ul; ++j) {
    const Eigen::MatrixXcd x_exp_cov = ul_sic_covariance(j, ch, sub.expansion);
    const Eigen::MatrixXcd x_fin_cov = ul_sic_covariance(j, ch, out.design);
    const Eigen::VectorXcd w_exp = x_exp_cov.llt().solve(ch.h_ul[j]);
    const Eigen::VectorXcd w_fin = x_fin_cov.llt().solve(ch.h_ul[j]);
    const double x_exp_eff =
        std::max(sub.x_exp[j], 1e-7 * std::sqrt(sub.q_bar[j]));
    const Eigen::MatrixXcd p_exp = x_exp_eff * x_exp_eff * w_exp * w_exp.adjoint();
    const Eigen::MatrixXcd p_fin =
        out.x_ul[j] * out.x_ul[j] * w_fin * w_fin.adjoint();
    const Eigen::MatrixXcd delta =
        ch.h_si.adjoint() * (p_fin - p_exp) * ch.h_si / out.t_ul[j];
    for (int k = 0; k < lay.k_dl; ++k) out.z_dual[k] += delta;
  }
  // UL box duals are recovered analytically: the epigraph geometry splits
  // the multipliers of coincident constraints arbitrarily, so the barrier
  // values do not transfer to the design problem. At an active bound the
  // box dual is fixed by stationarity; elsewhere it vanishes.
  if (lay.k_ul > 0) {
    const DcGradient gh = dc_h_grad(ch, out.design);
    const DcGradient gg = dc_g_grad(ch, out.design);
    for (int j = 0; j < lay.k_ul; ++j) {
      const double val = gh.wrt_q_ul[j] - gg.wrt_q_ul[j];
      out.lambda_lo[j] =
          out.design.q_ul[j] <= 1e-4 * sub.q_bar[j] ? std::max(0.0, -val) : 0.0;
      out.lambda_hi[j] = out.design.q_ul[j] >= (1.0 - 1e-6) * sub.q_bar[j]
                             ? std::max(0.0, val)
                             : 0.0;
    }
  }
  return out;
}

}  // namespace fdbeam
