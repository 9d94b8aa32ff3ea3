#pragma once

#include <memory>
#include <ostream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fdbeam/config.hpp"

namespace fdbeam {

// ---------------------------------------------------------------------------
// Real parametrization of complex Hermitian matrix variables.
//
// An n x n Hermitian block occupies n^2 consecutive real coordinates:
//   [0, n)            diagonal entries (real),
//   [n, n^2) in pairs (Re M_ij, Im M_ij) for i < j, row-major pair order.
// ---------------------------------------------------------------------------

inline int herm_dim(int n) { return n * n; }

// Basis matrix B_a of the parametrization (dQ/dz_a).
Eigen::MatrixXcd herm_basis(int n, int a);

// Coordinates of a Hermitian matrix under the parametrization above.
Eigen::VectorXd herm_to_coords(const Eigen::MatrixXcd& m);

Eigen::MatrixXcd coords_to_herm(const Eigen::Ref<const Eigen::VectorXd>& z, int n);

// Coordinates of the gradient: given the matrix gradient G (df = tr(G dQ)),
// returns df/dz_a. Off-diagonal components pick up a factor 2.
Eigen::VectorXd herm_grad_to_coords(const Eigen::MatrixXcd& g);

// ---------------------------------------------------------------------------
// Smooth terms. The solver minimizes
//     phi_t(z) = t * sum_k w_k * f_k(z)  +  sum_b (-log s_b(z))
// where the f_k are objective terms (w_k chosen so the sum is convex) and the
// s_b are barrier slacks. Both lists share the term types below.
// ---------------------------------------------------------------------------

struct SparseLin {
  double c0 = 0.0;
  std::vector<std::pair<int, double>> c;  // (coordinate, coefficient)

  double eval(const Eigen::VectorXd& z) const {
    double v = c0;
    for (const auto& [idx, w] : c) v += w * z[idx];
    return v;
  }
};

class Term {
 public:
  virtual ~Term() = default;
  // Adds w * f(z) and derivatives; returns false when z is outside the domain.
  virtual bool accumulate(const Eigen::VectorXd& z, double w, double& val,
                          Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const = 0;
  // Value only (line search); NaN when outside the domain.
  virtual double value(const Eigen::VectorXd& z) const = 0;
  // Barrier parameter of -log f when used as a barrier (n for log det blocks).
  virtual double nu() const { return 1.0; }
};

using TermPtr = std::shared_ptr<const Term>;

// f(z) = log det(C + sum_a z_a D_a), D_a Hermitian. Covers the UL log-det
// rate term, PSD cone barriers (C = 0, D_a = basis) and the budget indirectly.
class LogDetAffineTerm final : public Term {
 public:
  LogDetAffineTerm(Eigen::MatrixXcd c,
                   std::vector<std::pair<int, Eigen::MatrixXcd>> coeffs);
  bool accumulate(const Eigen::VectorXd& z, double w, double& val,
                  Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const override;
  double value(const Eigen::VectorXd& z) const override;
  double nu() const override { return static_cast<double>(c_.rows()); }

  Eigen::MatrixXcd assemble(const Eigen::VectorXd& z) const;

 private:
  Eigen::MatrixXcd c_;
  std::vector<std::pair<int, Eigen::MatrixXcd>> coeffs_;
};

// f(z) = log(c0 + c.z - 1/2 sum_a r_a z_a^2): log of a concave quadratic.
// Quadratic part empty -> log-affine. Used for the DL rate logs, scalar
// bounds, the rotated-cone slack q - x^2 and the F-surrogate slack.
class LogConcaveQuadTerm final : public Term {
 public:
  LogConcaveQuadTerm(SparseLin lin, std::vector<std::pair<int, double>> quad = {});
  bool accumulate(const Eigen::VectorXd& z, double w, double& val,
                  Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const override;
  double value(const Eigen::VectorXd& z) const override;

  double slack(const Eigen::VectorXd& z) const;

 private:
  SparseLin lin_;
  std::vector<std::pair<int, double>> quad_;
};

// f(z) = c0 + c.z (objective only; no curvature, no domain restriction).
class AffineTerm final : public Term {
 public:
  explicit AffineTerm(SparseLin lin) : lin_(std::move(lin)) {}
  bool accumulate(const Eigen::VectorXd& z, double w, double& val,
                  Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const override;
  double value(const Eigen::VectorXd& z) const override { return lin_.eval(z); }

 private:
  SparseLin lin_;
};

// ---------------------------------------------------------------------------
// Path-following solver
// ---------------------------------------------------------------------------

enum class SubStatus { optimal, max_iter, numerical_failure, infeasible };

const char* to_string(SubStatus s);

struct BarrierProblem {
  int dim = 0;
  std::vector<std::pair<TermPtr, double>> objective;  // minimize sum w*f(z)
  std::vector<TermPtr> barriers;                      // each contributes -log f

  double nu() const;
  // Objective value sum w*f(z) (no barrier part).
  double objective_value(const Eigen::VectorXd& z) const;
  bool strictly_feasible(const Eigen::VectorXd& z) const;
};

struct BarrierResult {
  Eigen::VectorXd z;
  double objective = 0.0;  // final sum w*f(z)
  double t_final = 0.0;    // barrier parameter at exit
  double gap = 0.0;        // nu / t_final
  // Dual extraction point (duals = 1/(t_dual * slack at z_dual)): the last
  // stage whose centering converged to the Newton tolerance. Late stages can
  // stall on nearly singular Hessians; their primal is still the best
  // objective-wise, but duals read off an uncentered point are noisy.
  Eigen::VectorXd z_dual;
  double t_dual = 0.0;
  SubStatus status = SubStatus::numerical_failure;
  int newton_iters = 0;
};

// z0 must be strictly feasible. `debug` gets one line per Newton step.
BarrierResult solve_barrier(const BarrierProblem& prob, Eigen::VectorXd z0,
                            const SolverSettings& settings,
                            std::ostream* debug = nullptr);

}  // namespace fdbeam
