#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fdbeam {

enum class ChannelMode { iid, realistic };

// Interior-point settings for the convex subproblem solver.
struct SolverSettings {
  double gap_tol_rel = 1e-7;     // relative duality gap at termination
  double gap_tol_abs = 1e-10;    // absolute gap cap; keeps iterate traces
                                 // monotone well inside the 1e-9 slack
  double newton_tol = 1e-12;     // stop centering when decrement^2/2 falls below;
                                 // tight centering keeps the extracted duals clean
  double barrier_growth = 10.0;  // barrier parameter multiplier per stage
  int max_newton_total = 1000;   // across all stages of one solve
  int max_newton_per_stage = 80;
  int verbosity = 0;             // >0: one line per Newton step to stderr
};

struct AlgorithmSettings {
  double stop_epsilon = 1e-5;  // objective increase over the trailing window
  int stop_window = 10;
  int max_iterations = 500;
  int max_restarts = 3;
  int randomization_samples = 1000;
  double rank1_tol = 1e-6;  // lambda2/lambda1 below this counts as rank-1
};

// All physical and algorithmic parameters of one experiment. Powers are
// stored linear (Watts); dBm / dB fields in scenario files are converted at
// load (see from_json).
struct ScenarioConfig {
  int n_tx = 4;
  int n_rx = 2;
  int k_dl = 2;
  int k_ul = 2;
  double p_bs = 0.3981071705534972;   // 26 dBm
  double q_bar = 0.19952623149688797; // 23 dBm, same budget for every UL user
  double sigma_si2 = 1e-10;           // residual SI power ratio, linear
  double rician_k = 1.0;
  double bandwidth_hz = 10e6;
  double nf_dl_db = 9.0;
  double nf_bs_db = 5.0;
  double cell_radius_km = 0.1;
  ChannelMode channel_mode = ChannelMode::realistic;
  std::uint64_t seed = 1;
  SolverSettings solver;
  AlgorithmSettings algo;

  // Optional fixed user drop; when set, campaign drivers use these positions
  // instead of drawing a topology.
  std::optional<std::vector<Eigen::Vector2d>> fixed_dl_positions_km;
  std::optional<std::vector<Eigen::Vector2d>> fixed_ul_positions_km;

  void validate() const;  // throws std::invalid_argument

  Eigen::VectorXd q_bar_vector() const {
    return Eigen::VectorXd::Constant(k_ul, q_bar);
  }
};

ScenarioConfig scenario_from_json_text(const std::string& text);
ScenarioConfig scenario_from_json_file(const std::string& path);
std::string scenario_to_json_text(const ScenarioConfig& cfg);

// FNV-1a over the canonical JSON serialization; identifies a config in
// manifests and result records.
std::uint64_t config_hash(const ScenarioConfig& cfg);
std::string config_hash_hex(const ScenarioConfig& cfg);

}  // namespace fdbeam
