#include "fdbeam/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "fdbeam/units.hpp"

namespace fdbeam {

using nlohmann::json;

AlgoChoice algo_choice_from_string(const std::string& s) {
  if (s == "1" || s == "maxdet") return AlgoChoice::maxdet;
  if (s == "2" || s == "spca") return AlgoChoice::spca;
  if (s == "both") return AlgoChoice::both;
  if (s == "race") return AlgoChoice::race;
  throw std::invalid_argument("unknown algorithm choice: " + s);
}

std::string to_string(AlgoChoice a) {
  switch (a) {
    case AlgoChoice::maxdet: return "1";
    case AlgoChoice::spca: return "2";
    case AlgoChoice::both: return "both";
    case AlgoChoice::race: return "race";
  }
  return "?";
}

Campaign Campaign::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open campaign file: " + path);
  const json j = json::parse(in);
  Campaign c;
  if (j.contains("scenario_file"))
    c.base = scenario_from_json_file(j.at("scenario_file").get<std::string>());
  else if (j.contains("scenario"))
    c.base = scenario_from_json_text(j.at("scenario").dump());
  if (j.contains("sweep_sigma_si_db")) {
    c.kind = SweepKind::sigma_si;
    c.sigma_si_db = j.at("sweep_sigma_si_db").get<std::vector<double>>();
  } else if (j.contains("sweep_cci_distance_m")) {
    c.kind = SweepKind::cci_distance;
    for (double m : j.at("sweep_cci_distance_m").get<std::vector<double>>())
      c.cci_distance_km.push_back(m / 1000.0);
  } else if (j.contains("topology_count")) {
    c.kind = SweepKind::topologies;
    c.topology_count = j.at("topology_count").get<int>();
  }
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("algorithms"))
    c.algorithms = algo_choice_from_string(j.at("algorithms").get<std::string>());
  if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (c.trials < 1) throw std::invalid_argument("trials must be >= 1");
  return c;
}

namespace {

// Stream purposes; keeps every random consumer on its own Philox stream.
enum Purpose : std::uint64_t {
  kChannel = 0,
  kMaxdet = 1,
  kSpca = 2,
  kHalfDuplex = 3,
  kTopology = 4,
  kBlind = 5,
};

json trace_json(const IterationTrace& trace) {
  json arr = json::array();
  for (const auto& rec : trace)
    arr.push_back({{"iter", rec.iter},
                   {"surrogate", rec.surrogate},
                   {"true_se_bits", rec.true_se_bits},
                   {"status", to_string(rec.status)},
                   {"newton_iters", rec.newton_iters}});
  return arr;
}

}  // namespace

std::string run_record_json(const ScenarioConfig& cfg, std::uint64_t trial_index,
                            const std::string& algo, const Solution& sol) {
  json rank = json::array();
  for (const auto& r : sol.rank)
    rank.push_back({{"is_rank1", r.is_rank1}, {"eig_ratio", r.eig_ratio}});
  json payload{
      {"config_hash", config_hash_hex(cfg)},
      {"seed", cfg.seed},
      {"trial", trial_index},
      {"algo", algo},
      {"status", to_string(sol.final_status)},
      {"iterations", sol.iterations},
      {"restarts", sol.restarts},
      {"relaxed_dl_bits", sol.relaxed_rates.dl_total_bits},
      {"relaxed_ul_bits", sol.relaxed_rates.ul_total_bits},
      {"extracted_dl_bits", sol.extracted_rates.dl_total_bits},
      {"extracted_ul_bits", sol.extracted_rates.ul_total_bits},
      {"rank", rank},
      {"kkt_available", sol.kkt.available},
      {"kkt_max_scaled", sol.kkt.max_scaled},
      {"trace", trace_json(sol.trace)},
  };
  json record{{"payload", payload}, {"timing", {{"seconds", sol.seconds}}}};
  return record.dump();
}

TrialResult run_trial(const ScenarioConfig& cfg, AlgoChoice algo,
                      std::uint64_t trial_index) {
  TrialResult res;
  Rng ch_rng = make_stream(cfg.seed, trial_index, kChannel);
  const ChannelSet ch = draw_channels_auto(cfg, ch_rng);

  auto run_one = [&](bool spca) {
    Rng rng = make_stream(cfg.seed, trial_index, spca ? kSpca : kMaxdet);
    Solution sol = spca ? run_iterative_spca(cfg, ch, rng)
                        : run_iterative_maxdet(cfg, ch, rng);
    res.records.push_back(
        run_record_json(cfg, trial_index, spca ? "2" : "1", sol));
    return sol;
  };

  Solution pick;
  if (algo == AlgoChoice::maxdet) {
    pick = run_one(false);
    res.algo = "1";
  } else if (algo == AlgoChoice::spca) {
    pick = run_one(true);
    res.algo = "2";
  } else {
    // both / race: keep the better extracted sum SE, log both runs.
    Solution a = run_one(false);
    Solution b = run_one(true);
    if (a.extracted_rates.total_bits() >= b.extracted_rates.total_bits()) {
      pick = std::move(a);
      res.algo = "1";
    } else {
      pick = std::move(b);
      res.algo = "2";
    }
  }
  res.fd_dl = pick.extracted_rates.dl_total_bits;
  res.fd_ul = pick.extracted_rates.ul_total_bits;
  res.fd_dl_relaxed = pick.relaxed_rates.dl_total_bits;
  res.fd_ul_relaxed = pick.relaxed_rates.ul_total_bits;
  res.seconds = pick.seconds;

  Rng hd_rng = make_stream(cfg.seed, trial_index, kHalfDuplex);
  const HalfDuplexResult hd = run_half_duplex(cfg, ch, hd_rng);
  res.hd_dl = hd.dl_halved;
  res.hd_ul = hd.ul_halved;
  return res;
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double pct_gain(double fd, double hd) { return 100.0 * (fd - hd) / hd; }

SweepPoint reduce_point(double axis, const std::vector<TrialResult>& trials) {
  SweepPoint p;
  p.axis = axis;
  std::vector<double> g_dl, g_ul, g_tot;
  for (const auto& t : trials) {
    p.fd_dl += t.fd_dl;
    p.fd_ul += t.fd_ul;
    p.hd_dl += t.hd_dl;
    p.hd_ul += t.hd_ul;
    g_dl.push_back(pct_gain(t.fd_dl, t.hd_dl));
    g_ul.push_back(pct_gain(t.fd_ul, t.hd_ul));
    g_tot.push_back(pct_gain(t.fd_total(), t.hd_total()));
  }
  const double n = static_cast<double>(trials.size());
  p.fd_dl /= n;
  p.fd_ul /= n;
  p.hd_dl /= n;
  p.hd_ul /= n;
  p.fd_total = p.fd_dl + p.fd_ul;
  p.hd_total = p.hd_dl + p.hd_ul;
  p.gain_dl_mean = mean(g_dl);
  p.gain_ul_mean = mean(g_ul);
  p.gain_total_mean = mean(g_tot);
  p.gain_dl_pooled = pct_gain(p.fd_dl, p.hd_dl);
  p.gain_ul_pooled = pct_gain(p.fd_ul, p.hd_ul);
  p.gain_total_pooled = pct_gain(p.fd_total, p.hd_total);
  return p;
}

}  // namespace

SweepResult sweep_sigma_si(const Campaign& c) {
  SweepResult res;
  for (double si_db : c.sigma_si_db) {
    ScenarioConfig cfg = c.base;
    cfg.sigma_si2 = db_to_linear(si_db);
    const std::vector<TrialResult> trials = parallel_map<TrialResult>(
        c.trials, c.jobs,
        [&](int t) { return run_trial(cfg, c.algorithms, t); });
    res.points.push_back(reduce_point(si_db, trials));
    res.trials.push_back(trials);
  }
  return res;
}

SweepResult sweep_cci_distance(const Campaign& c) {
  SweepResult res;
  ScenarioConfig cfg = c.base;
  cfg.k_dl = 1;
  cfg.k_ul = 1;
  const double r = cfg.cell_radius_km;
  for (double d : c.cci_distance_km) {
    // DL user fixed at distance r, UL user on the 0.85 r circle.
    const double cos_phi =
        (r * r + 0.7225 * r * r - d * d) / (2.0 * 0.85 * r * r);
    if (cos_phi < -1.0 || cos_phi > 1.0)
      throw std::invalid_argument("cci distance outside [0.15r, 1.85r]");
    const double phi = std::acos(cos_phi);
    cfg.fixed_dl_positions_km = {{Eigen::Vector2d(r, 0.0)}};
    cfg.fixed_ul_positions_km = {
        {Eigen::Vector2d(0.85 * r * std::cos(phi), 0.85 * r * std::sin(phi))}};
    const std::vector<TrialResult> trials = parallel_map<TrialResult>(
        c.trials, c.jobs,
        [&](int t) { return run_trial(cfg, c.algorithms, t); });
    res.points.push_back(reduce_point(d * 1000.0, trials));  // axis in meters
    res.trials.push_back(trials);
  }
  return res;
}

CdfResult topology_cdf(const Campaign& c) {
  CdfResult res;
  struct TopoGain {
    double dl, ul, total;
  };
  const std::vector<TopoGain> gains = parallel_map<TopoGain>(
      c.topology_count, c.jobs, [&](int topo) {
        ScenarioConfig cfg = c.base;
        Rng topo_rng = make_stream(cfg.seed, topo, kTopology);
        const Topology t = draw_topology(cfg, topo_rng);
        cfg.fixed_dl_positions_km = t.dl_positions;
        cfg.fixed_ul_positions_km = t.ul_positions;
        std::vector<double> g_dl, g_ul, g_tot;
        for (int trial = 0; trial < c.trials; ++trial) {
          const std::uint64_t idx =
              static_cast<std::uint64_t>(topo) * 100000 + trial;
          const TrialResult tr = run_trial(cfg, c.algorithms, idx);
          g_dl.push_back(pct_gain(tr.fd_dl, tr.hd_dl));
          g_ul.push_back(pct_gain(tr.fd_ul, tr.hd_ul));
          g_tot.push_back(pct_gain(tr.fd_total(), tr.hd_total()));
        }
        return TopoGain{mean(g_dl), mean(g_ul), mean(g_tot)};
      });
  for (const auto& g : gains) {
    res.gain_dl.push_back(g.dl);
    res.gain_ul.push_back(g.ul);
    res.gain_total.push_back(g.total);
  }
  return res;
}

CciBlindResult compare_cci_blind(const Campaign& c) {
  CciBlindResult res;
  struct Pair {
    double aware, blind;
  };
  const std::vector<Pair> pairs = parallel_map<Pair>(
      c.topology_count, c.jobs, [&](int topo) {
        ScenarioConfig cfg = c.base;
        Rng topo_rng = make_stream(cfg.seed, topo, kTopology);
        const Topology t = draw_topology(cfg, topo_rng);
        cfg.fixed_dl_positions_km = t.dl_positions;
        cfg.fixed_ul_positions_km = t.ul_positions;
        const bool use_spca = c.algorithms == AlgoChoice::spca;
        std::vector<double> aware, blind;
        for (int trial = 0; trial < c.trials; ++trial) {
          const std::uint64_t idx =
              static_cast<std::uint64_t>(topo) * 100000 + trial;
          Rng ch_rng = make_stream(cfg.seed, idx, kChannel);
          const ChannelSet ch = draw_channels_auto(cfg, ch_rng);
          // CCI-aware design on the true channels.
          Rng rng_a = make_stream(cfg.seed, idx, use_spca ? kSpca : kMaxdet);
          const Solution sol_a = use_spca ? run_iterative_spca(cfg, ch, rng_a)
                                          : run_iterative_maxdet(cfg, ch, rng_a);
          aware.push_back(sol_a.extracted_rates.total_bits());
          // CCI-blind design: optimize with g = 0, evaluate on the truth.
          ChannelSet ch_blind = ch;
          ch_blind.g_cci.setZero();
          Rng rng_b = make_stream(cfg.seed, idx, kBlind);
          const Solution sol_b = use_spca
                                     ? run_iterative_spca(cfg, ch_blind, rng_b)
                                     : run_iterative_maxdet(cfg, ch_blind, rng_b);
          Design blind_design = sol_b.design;
          if (!sol_b.beamformers.empty()) {
            for (int i = 0; i < cfg.k_dl; ++i)
              blind_design.q_dl[i] =
                  sol_b.beamformers[i] * sol_b.beamformers[i].adjoint();
          }
          blind.push_back(rate_breakdown(ch, blind_design).total_bits());
        }
        return Pair{mean(aware), mean(blind)};
      });
  for (const auto& p : pairs) {
    res.aware_total.push_back(p.aware);
    res.blind_total.push_back(p.blind);
  }
  res.aware_mean = mean(res.aware_total);
  res.blind_mean = mean(res.blind_total);
  return res;
}

ConvergenceReport convergence_report(const ScenarioConfig& cfg,
                                     std::uint64_t trial_index) {
  ConvergenceReport rep;
  Rng ch_rng = make_stream(cfg.seed, trial_index, kChannel);
  const ChannelSet ch = draw_channels_auto(cfg, ch_rng);
  Rng rng1 = make_stream(cfg.seed, trial_index, kMaxdet);
  const Solution s1 = run_iterative_maxdet(cfg, ch, rng1);
  for (const auto& rec : s1.trace)
    rep.maxdet.push_back({rec.iter, rec.surrogate, rec.true_se_bits});
  Rng rng2 = make_stream(cfg.seed, trial_index, kSpca);
  const Solution s2 = run_iterative_spca(cfg, ch, rng2);
  for (const auto& rec : s2.trace)
    rep.spca.push_back({rec.iter, rec.surrogate, rec.true_se_bits});
  return rep;
}

std::vector<TimingRow> timing_report(const ScenarioConfig& base,
                                     const std::vector<int>& n_tx_ladder,
                                     const std::vector<int>& k_dl_ladder,
                                     int trials) {
  std::vector<TimingRow> rows;
  auto run_cell = [&](ScenarioConfig cfg, const std::string& label) {
    TimingRow row;
    row.label = label;
    row.n_tx = cfg.n_tx;
    row.n_rx = cfg.n_rx;
    row.k_dl = cfg.k_dl;
    row.k_ul = cfg.k_ul;
    for (int t = 0; t < trials; ++t) {
      Rng ch_rng = make_stream(cfg.seed, t, kChannel);
      const ChannelSet ch = draw_channels_auto(cfg, ch_rng);
      Rng rng1 = make_stream(cfg.seed, t, kMaxdet);
      const Solution s1 = run_iterative_maxdet(cfg, ch, rng1);
      row.maxdet_seconds += s1.seconds / trials;
      row.maxdet_iters += s1.iterations;
      Rng rng2 = make_stream(cfg.seed, t, kSpca);
      const Solution s2 = run_iterative_spca(cfg, ch, rng2);
      row.spca_seconds += s2.seconds / trials;
      row.spca_iters += s2.iterations;
    }
    rows.push_back(row);
  };
  for (int n_tx : n_tx_ladder) {
    ScenarioConfig cfg = base;
    cfg.n_tx = n_tx;
    run_cell(cfg, "n_tx=" + std::to_string(n_tx));
  }
  for (int k_dl : k_dl_ladder) {
    ScenarioConfig cfg = base;
    cfg.k_dl = k_dl;
    if (cfg.fixed_dl_positions_km) cfg.fixed_dl_positions_km.reset();
    if (cfg.fixed_ul_positions_km) cfg.fixed_ul_positions_km.reset();
    run_cell(cfg, "k_dl=" + std::to_string(k_dl));
  }
  return rows;
}

// --- statistics -------------------------------------------------------------

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (i + j) / 2.0 + 1.0;  // average rank for ties
    for (int k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

double spearman_perm_pvalue(const std::vector<double>& x,
                            const std::vector<double>& y, bool negative,
                            int n_perm, std::uint64_t seed) {
  const double observed = spearman_rho(x, y);
  const std::vector<double> rx = ranks(x);
  std::vector<double> ry = ranks(y);
  Rng rng(seed);
  int hits = 0;
  for (int p = 0; p < n_perm; ++p) {
    for (int i = static_cast<int>(ry.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(ry[i], ry[j]);
    }
    const double rho = pearson(rx, ry);
    if (negative ? rho <= observed : rho >= observed) ++hits;
  }
  return (hits + 1.0) / (n_perm + 1.0);
}

// --- output -----------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  return out;
}

void write_header(std::ofstream& out, const ScenarioConfig& cfg) {
  out << "# config_hash=" << config_hash_hex(cfg) << " seed=" << cfg.seed << "\n";
}

}  // namespace

void write_sweep_csv(const std::string& path, const SweepResult& r,
                     const Campaign& c, const std::string& axis_name) {
  std::ofstream out = open_out(path);
  write_header(out, c.base);
  out << axis_name
      << ",fd_dl,fd_ul,fd_total,hd_dl,hd_ul,hd_total,"
         "gain_dl_mean_pct,gain_ul_mean_pct,gain_total_mean_pct,"
         "gain_dl_pooled_pct,gain_ul_pooled_pct,gain_total_pooled_pct\n";
  for (const auto& p : r.points)
    out << p.axis << ',' << p.fd_dl << ',' << p.fd_ul << ',' << p.fd_total << ','
        << p.hd_dl << ',' << p.hd_ul << ',' << p.hd_total << ','
        << p.gain_dl_mean << ',' << p.gain_ul_mean << ',' << p.gain_total_mean
        << ',' << p.gain_dl_pooled << ',' << p.gain_ul_pooled << ','
        << p.gain_total_pooled << '\n';
}

void write_cdf_csv(const std::string& path, const CdfResult& r, const Campaign& c) {
  std::ofstream out = open_out(path);
  write_header(out, c.base);
  out << "cdf,gain_dl_pct,gain_ul_pct,gain_total_pct\n";
  std::vector<double> dl = r.gain_dl, ul = r.gain_ul, tot = r.gain_total;
  std::sort(dl.begin(), dl.end());
  std::sort(ul.begin(), ul.end());
  std::sort(tot.begin(), tot.end());
  const int n = static_cast<int>(tot.size());
  for (int i = 0; i < n; ++i)
    out << (i + 1.0) / n << ',' << dl[i] << ',' << ul[i] << ',' << tot[i] << '\n';
}

void write_cci_blind_csv(const std::string& path, const CciBlindResult& r,
                         const Campaign& c) {
  std::ofstream out = open_out(path);
  write_header(out, c.base);
  out << "cdf,aware_total_bits,blind_total_bits\n";
  std::vector<double> aware = r.aware_total, blind = r.blind_total;
  std::sort(aware.begin(), aware.end());
  std::sort(blind.begin(), blind.end());
  const int n = static_cast<int>(aware.size());
  for (int i = 0; i < n; ++i)
    out << (i + 1.0) / n << ',' << aware[i] << ',' << blind[i] << '\n';
}

void write_convergence_csv(const std::string& path, const ConvergenceReport& r,
                           const ScenarioConfig& cfg) {
  std::ofstream out = open_out(path);
  write_header(out, cfg);
  out << "algo,iter,surrogate_nats,true_se_bits\n";
  for (const auto& p : r.maxdet)
    out << "1," << p.iter << ',' << p.surrogate << ',' << p.true_se_bits << '\n';
  for (const auto& p : r.spca)
    out << "2," << p.iter << ',' << p.surrogate << ',' << p.true_se_bits << '\n';
}

void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows,
                      const ScenarioConfig& cfg, int trials) {
  std::ofstream out = open_out(path);
  write_header(out, cfg);
  out << "# wall-clock of this build's internal solver; not comparable with "
         "other solvers or hardware\n";
  out << "label,n_tx,n_rx,k_dl,k_ul,trials,maxdet_seconds,spca_seconds,"
         "maxdet_iters,spca_iters\n";
  for (const auto& r : rows)
    out << r.label << ',' << r.n_tx << ',' << r.n_rx << ',' << r.k_dl << ','
        << r.k_ul << ',' << trials << ',' << r.maxdet_seconds << ','
        << r.spca_seconds << ',' << r.maxdet_iters << ',' << r.spca_iters
        << '\n';
}

void write_manifest(const std::string& path, const Campaign& c,
                    const std::vector<std::string>& outputs) {
  std::ofstream out = open_out(path);
  json j{{"config_hash", config_hash_hex(c.base)},
         {"seed", c.base.seed},
         {"trials", c.trials},
         {"algorithms", to_string(c.algorithms)},
         {"outputs", outputs},
         {"scenario", json::parse(scenario_to_json_text(c.base))}};
  out << j.dump(2) << "\n";
}

}  // namespace fdbeam
