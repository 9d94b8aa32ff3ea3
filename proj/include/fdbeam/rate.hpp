#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fdbeam/channel.hpp"

namespace fdbeam {

// Optimization variables: DL transmit covariances and UL power loadings.
struct Design {
  std::vector<Eigen::MatrixXcd> q_dl;  // K_D Hermitian N_T x N_T matrices
  Eigen::VectorXd q_ul;                // K_U nonnegative scalars

  int k_dl() const { return static_cast<int>(q_dl.size()); }
  int k_ul() const { return static_cast<int>(q_ul.size()); }

  double dl_power() const;

  static Design zero(int k_dl, int n_tx, int k_ul);
};

// Symmetrize every covariance in place (drift control after solver steps).
void hermitize(Design& d);

// PSD-to-tolerance, budget and box checks per the Design invariants.
bool design_feasible(const Design& d, double p_bs, const Eigen::VectorXd& q_bar,
                     double tol = 1e-9);

struct RateBreakdown {
  Eigen::VectorXd dl_sinr, dl_rate_bits;  // per DL user
  Eigen::VectorXd ul_sinr, ul_rate_bits;  // per UL user
  double dl_total_bits = 0.0;
  double ul_total_bits = 0.0;
  double total_bits() const { return dl_total_bits + ul_total_bits; }
};

// sigma_dl + sum_{k != i} h_i^H Q_k h_i + sum_j q_j |g_ji|^2
double dl_interference(int i, const ChannelSet& ch, const Design& d);

// sigma_dl + sum_k h_i^H Q_k h_i + sum_j q_j |g_ji|^2   (signal included)
double dl_signal_plus_interference(int i, const ChannelSet& ch, const Design& d);

// sigma_bs*I + sum_i H Q_i H^H
Eigen::MatrixXcd si_covariance(const ChannelSet& ch, const Design& d);

// si_covariance + sum_j q_j h_j h_j^H
Eigen::MatrixXcd ul_covariance(const ChannelSet& ch, const Design& d);

// sigma_bs*I + sum_{m > j} q_m h_m h_m^H + sum_i H Q_i H^H  (SIC, ascending order)
Eigen::MatrixXcd ul_sic_covariance(int j, const ChannelSet& ch, const Design& d);

double downlink_sinr(int i, const ChannelSet& ch, const Design& d);
double uplink_sinr(int j, const ChannelSet& ch, const Design& d);

// bits/s/Hz
double downlink_se(const ChannelSet& ch, const Design& d);
double downlink_se_ratio_form(const ChannelSet& ch, const Design& d);
double uplink_se(const ChannelSet& ch, const Design& d);
double uplink_se_det(const ChannelSet& ch, const Design& d);

RateBreakdown rate_breakdown(const ChannelSet& ch, const Design& d);

// DC decomposition of the sum SE in nats: dc_h - dc_g = ln2 * (R_D + R_U).
double dc_h(const ChannelSet& ch, const Design& d);
double dc_g(const ChannelSet& ch, const Design& d);

struct DcGradient {
  std::vector<Eigen::MatrixXcd> wrt_q_dl;  // K_D Hermitian matrices
  Eigen::VectorXd wrt_q_ul;                // K_U scalars
};

DcGradient dc_h_grad(const ChannelSet& ch, const Design& d);
DcGradient dc_g_grad(const ChannelSet& ch, const Design& d);

// Affine majorization of dc_g around `expansion`, evaluated at `at`.
// Tight and gradient-matching at `at == expansion`; >= dc_g everywhere.
double dc_g_affine(const ChannelSet& ch, const Design& at, const Design& expansion);

}  // namespace fdbeam
