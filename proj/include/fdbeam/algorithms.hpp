#pragma once

#include <cstdint>
#include <vector>

#include "fdbeam/config.hpp"
#include "fdbeam/subproblems.hpp"

namespace fdbeam {

struct IterationRecord {
  int iter = 0;
  double surrogate = 0.0;      // subproblem objective u_n, nats
  double true_se_bits = 0.0;   // R_D + R_U at the iterate
  double seconds = 0.0;        // wall clock of the subproblem solve
  SubStatus status = SubStatus::numerical_failure;
  int newton_iters = 0;
};

using IterationTrace = std::vector<IterationRecord>;

struct KktResiduals {
  bool available = false;
  double stationarity_q = 0.0;       // scaled, max over DL covariances
  double stationarity_q_ul = 0.0;    // scaled, max over UL powers
  double comp_slack_box = 0.0;       // lambda * q and lambda~ * (q - q_bar)
  double comp_slack_psd = 0.0;       // tr(Q Z)
  double comp_slack_budget = 0.0;    // mu * (sum tr Q - P)
  double max_scaled = 0.0;
  // Same stationarity residuals with the majorization gradient at the
  // expansion instead of the exact gradient at the converged point.
  double stationarity_q_surrogate = 0.0;
  double stationarity_q_ul_surrogate = 0.0;
};

struct RankDiagnostic {
  bool is_rank1 = false;
  double eig_ratio = 0.0;  // lambda2 / lambda1, 0 for exact rank-1
};

RankDiagnostic check_rank1(const Eigen::MatrixXcd& q, double tol = 1e-6);

struct ExtractionResult {
  std::vector<Eigen::VectorXcd> beamformers;
  RateBreakdown rates;   // achieved with the extracted rank-1 design
  int best_sample = -1;  // -1 when K_D == 0
};

// Gaussian-phase randomization: draws unit-circle vectors through Q^{1/2}
// jointly for all users and keeps the sample with the best sum SE. Every
// candidate preserves tr(Q) exactly.
ExtractionResult randomize_rank1(const Design& design, const ChannelSet& ch,
                                 int n_samples, Rng& rng);

struct Solution {
  Design design;
  std::vector<Eigen::VectorXcd> beamformers;
  std::vector<RankDiagnostic> rank;
  RateBreakdown relaxed_rates;
  RateBreakdown extracted_rates;
  KktResiduals kkt;
  IterationTrace trace;
  SubStatus final_status = SubStatus::numerical_failure;
  int iterations = 0;
  int restarts = 0;
  double seconds = 0.0;
};

// Iterate starting point: random Wishart covariances scaled into the budget,
// uniform UL powers, x = sqrt(q), slack seeds from the active constraints.
struct InitState {
  Design design;
  Eigen::VectorXd x0;    // sqrt(q0)
  Eigen::VectorXd t0;    // 1 + dl_sinr at the start
  Eigen::VectorXd beta0; // dl_interference at the start
  Eigen::VectorXd psi0;  // t0 / beta0
};

InitState initialize(const ScenarioConfig& cfg, const ChannelSet& ch, Rng& rng);

// True when the increase of `u` over the trailing `window` entries is below
// `epsilon`, or when the iteration cap is reached.
bool stopping_rule(const std::vector<double>& u, double epsilon, int window,
                   int max_iterations);

Solution run_iterative_maxdet(const ScenarioConfig& cfg, const ChannelSet& ch,
                              Rng& rng);
Solution run_iterative_spca(const ScenarioConfig& cfg, const ChannelSet& ch,
                            Rng& rng);

// Residuals of the first-order conditions of the relaxed design problem at
// `design`, with duals taken from the final subproblem. The stationarity
// residual uses the exact dc_g gradient at `design`; the `_surrogate` fields
// use the majorization gradient at `expansion`.
KktResiduals kkt_residual(const Design& design, const SubproblemResult& duals,
                          const ChannelSet& ch, const Design& expansion,
                          double p_bs, const Eigen::VectorXd& q_bar);

}  // namespace fdbeam
