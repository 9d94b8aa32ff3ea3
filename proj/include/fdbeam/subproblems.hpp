#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "fdbeam/barrier.hpp"
#include "fdbeam/rate.hpp"

namespace fdbeam {

// Result of one convex subproblem solve. Duals correspond to the shared
// constraints of the outer problem: 0 <= q_j (lambda_lo), q_j <= q_bar
// (lambda_hi), sum tr(Q) <= P_BS (mu), Q_i PSD (z_dual).
struct SubproblemResult {
  Design design;
  Eigen::VectorXd t_dl, t_ul, beta_dl, x_ul;  // slack variables where applicable
  double objective = 0.0;                     // subproblem objective, nats
  double mu = 0.0;
  std::vector<Eigen::MatrixXcd> z_dual;
  Eigen::VectorXd lambda_lo, lambda_hi;
  SubStatus status = SubStatus::numerical_failure;
  int newton_iters = 0;
};

// The determinant-maximization subproblem: maximize h(Q,q) - g_n(Q,q) over
// the power constraints, where g_n is the affine majorization of dc_g around
// the expansion point.
struct MaxdetSubproblem {
  const ChannelSet* channels = nullptr;
  Design expansion;
  double p_bs = 0.0;
  Eigen::VectorXd q_bar;
  Eigen::VectorXd theta_dl;    // per-DL-user interference at the expansion
  Eigen::MatrixXcd theta_si;   // SI-plus-noise covariance at the expansion

  static MaxdetSubproblem build(const ChannelSet& ch, const Design& expansion,
                                double p_bs, const Eigen::VectorXd& q_bar);
};

SubproblemResult solve_maxdet(const MaxdetSubproblem& sub,
                              const SolverSettings& settings,
                              std::ostream* debug = nullptr);

// The SDP-shaped subproblem of the SPCA iteration: maximize sum log t over
// the F-surrogate constraint, the linearized SIC-SINR constraint, the soft
// interference thresholds and the power constraints.
struct SpcaSubproblem {
  const ChannelSet* channels = nullptr;
  double p_bs = 0.0;
  Eigen::VectorXd q_bar;
  Design expansion;          // (Q_n, q_n)
  Eigen::VectorXd x_exp;     // x_n, one per UL user
  Eigen::VectorXd psi;       // psi_n > 0, one per DL user
  // Derived at build time:
  std::vector<Eigen::MatrixXcd> x_cov;       // X_j at the expansion (PD)
  Eigen::VectorXd g_exp;                     // x_n^2 h^H X^-1 h
  Eigen::VectorXd g_slope_x;                 // 2 x_n h^H X^-1 h
  std::vector<Eigen::MatrixXcd> g_slope_xcov;  // x_n^2 X^-1 h h^H X^-1

  static SpcaSubproblem build(const ChannelSet& ch, const Design& expansion,
                              const Eigen::VectorXd& x_exp,
                              const Eigen::VectorXd& psi, double p_bs,
                              const Eigen::VectorXd& q_bar);
};

SubproblemResult solve_spca(const SpcaSubproblem& sub,
                            const SolverSettings& settings,
                            std::ostream* debug = nullptr);

// Convex upper estimate of t*beta: F(t, beta, psi) = t^2/(2 psi) + psi beta^2 / 2.
inline double f_surrogate(double t, double beta, double psi) {
  return t * t / (2.0 * psi) + psi * beta * beta / 2.0;
}

// x^2 h^H X(Q,q)^-1 h for UL user j (the convex SIC-SINR core).
double g_sinr_core(int j, double x, const ChannelSet& ch, const Design& d);

// First-order upper bound of -g_sinr_core around the expansion carried by
// `sub`, evaluated at (x, Q, q).
double g_linearized(const SpcaSubproblem& sub, int j, double x, const Design& d);

}  // namespace fdbeam
