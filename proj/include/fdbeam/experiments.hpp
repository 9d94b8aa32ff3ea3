#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "fdbeam/baselines.hpp"

namespace fdbeam {

enum class AlgoChoice { maxdet, spca, both, race };

AlgoChoice algo_choice_from_string(const std::string& s);  // "1","2","both","race"
std::string to_string(AlgoChoice a);

enum class SweepKind { sigma_si, cci_distance, topologies, convergence, timing };

struct Campaign {
  ScenarioConfig base;
  SweepKind kind = SweepKind::sigma_si;
  std::vector<double> sigma_si_db;      // sigma_si sweep axis
  std::vector<double> cci_distance_km;  // CCI sweep axis
  int topology_count = 100;
  int trials = 50;
  AlgoChoice algorithms = AlgoChoice::both;
  int jobs = 0;  // 0: hardware concurrency
  std::string out_dir = "results";

  static Campaign from_json_file(const std::string& path);
};

// One full-duplex + half-duplex evaluation of a single channel realization.
struct TrialResult {
  double fd_dl = 0.0, fd_ul = 0.0;       // extracted-beamformer SE, bits/s/Hz
  double fd_dl_relaxed = 0.0, fd_ul_relaxed = 0.0;
  double hd_dl = 0.0, hd_ul = 0.0;       // halved
  double seconds = 0.0;
  std::string algo;                      // which algorithm produced fd_*
  std::vector<std::string> records;      // one JSON line per algorithm run
  double fd_total() const { return fd_dl + fd_ul; }
  double hd_total() const { return hd_dl + hd_ul; }
};

TrialResult run_trial(const ScenarioConfig& cfg, AlgoChoice algo,
                      std::uint64_t trial_index);

struct SweepPoint {
  double axis = 0.0;
  // Means over trials.
  double fd_dl = 0.0, fd_ul = 0.0, fd_total = 0.0;
  double hd_dl = 0.0, hd_ul = 0.0, hd_total = 0.0;
  // Mean of per-realization percent gains.
  double gain_dl_mean = 0.0, gain_ul_mean = 0.0, gain_total_mean = 0.0;
  // Percent gain of the means (pooled order).
  double gain_dl_pooled = 0.0, gain_ul_pooled = 0.0, gain_total_pooled = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<std::vector<TrialResult>> trials;  // per point
};

SweepResult sweep_sigma_si(const Campaign& c);

// Fixed geometry: one DL user at distance r from the BS, one UL user moving
// on the 0.85 r circle; the axis is the user-to-user distance.
SweepResult sweep_cci_distance(const Campaign& c);

struct CdfResult {
  // Per topology: mean percent gain over channel trials.
  std::vector<double> gain_dl, gain_ul, gain_total;  // sorted copies in CSV
};

CdfResult topology_cdf(const Campaign& c);

struct CciBlindResult {
  std::vector<double> aware_total, blind_total;  // per topology means
  double aware_mean = 0.0, blind_mean = 0.0;
};

CciBlindResult compare_cci_blind(const Campaign& c);

struct ConvergencePoint {
  int iter;
  double surrogate;
  double true_se_bits;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> maxdet, spca;
};

ConvergenceReport convergence_report(const ScenarioConfig& cfg,
                                     std::uint64_t trial_index);

struct TimingRow {
  std::string label;
  int n_tx, n_rx, k_dl, k_ul;
  double maxdet_seconds = 0.0, spca_seconds = 0.0;
  int maxdet_iters = 0, spca_iters = 0;
};

std::vector<TimingRow> timing_report(const ScenarioConfig& base,
                                     const std::vector<int>& n_tx_ladder,
                                     const std::vector<int>& k_dl_ladder,
                                     int trials);

// --- statistics -----------------------------------------------------------

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

// One-sided permutation p-value for negative (rho < 0) or positive trend.
double spearman_perm_pvalue(const std::vector<double>& x,
                            const std::vector<double>& y, bool negative,
                            int n_perm = 20000, std::uint64_t seed = 7);

// --- output ---------------------------------------------------------------

// CSV writers; schemas documented in the README. Every file starts with a
// comment line carrying the config hash and seed so rows are reconstructible.
void write_sweep_csv(const std::string& path, const SweepResult& r,
                     const Campaign& c, const std::string& axis_name);
void write_cdf_csv(const std::string& path, const CdfResult& r, const Campaign& c);
void write_cci_blind_csv(const std::string& path, const CciBlindResult& r,
                         const Campaign& c);
void write_convergence_csv(const std::string& path, const ConvergenceReport& r,
                           const ScenarioConfig& cfg);
void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows,
                      const ScenarioConfig& cfg, int trials);

// Per-run JSON record (one line each, appended to <out>/runs.jsonl). The
// deterministic payload excludes wall-clock timing, which is reported in a
// sibling "timing" object.
std::string run_record_json(const ScenarioConfig& cfg, std::uint64_t trial_index,
                            const std::string& algo, const Solution& sol);

void write_manifest(const std::string& path, const Campaign& c,
                    const std::vector<std::string>& outputs);

// Deterministic parallel map: applies fn(i) for i in [0, n) on `jobs` workers
// and returns results ordered by index, so worker count never changes output.
template <typename T>
std::vector<T> parallel_map(int n, int jobs, const std::function<T(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  std::vector<T> out(n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        out[i] = fn(i);
      }
    });
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace fdbeam
