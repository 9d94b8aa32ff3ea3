#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fdbeam/experiments.hpp"

namespace {

using namespace fdbeam;

struct CommonOpts {
  std::string scenario;
  std::string out_dir = "results";
  std::string algo = "both";
  std::uint64_t seed = 0;  // 0: keep scenario seed
  int trials = 0;          // 0: keep campaign/default
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--scenario", o.scenario, "scenario JSON file");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--algo", o.algo, "algorithm: 1, 2, both, race");
  cmd->add_option("--seed", o.seed, "override RNG seed");
  cmd->add_option("--trials", o.trials, "channel realizations per point");
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
}

Campaign make_campaign(const CommonOpts& o) {
  Campaign c;
  if (!o.scenario.empty()) c.base = scenario_from_json_file(o.scenario);
  if (o.seed != 0) c.base.seed = o.seed;
  if (o.trials > 0) c.trials = o.trials;
  c.jobs = o.jobs;
  c.algorithms = algo_choice_from_string(o.algo);
  c.out_dir = o.out_dir;
  return c;
}

void flush_records(const Campaign& c, const SweepResult& r) {
  std::filesystem::create_directories(c.out_dir);
  std::ofstream out(c.out_dir + "/runs.jsonl");
  for (const auto& point : r.trials)
    for (const auto& trial : point)
      for (const auto& rec : trial.records) out << rec << "\n";
}

int cmd_run(const std::string& campaign_file, const CommonOpts& o) {
  Campaign c = Campaign::from_json_file(campaign_file);
  if (o.seed != 0) c.base.seed = o.seed;
  if (o.trials > 0) c.trials = o.trials;
  if (o.jobs != 0) c.jobs = o.jobs;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  switch (c.kind) {
    case SweepKind::sigma_si: {
      const SweepResult r = sweep_sigma_si(c);
      write_sweep_csv(c.out_dir + "/sweep_si.csv", r, c, "sigma_si_db");
      flush_records(c, r);
      write_manifest(c.out_dir + "/manifest.json", c,
                     {"sweep_si.csv", "runs.jsonl"});
      break;
    }
    case SweepKind::cci_distance: {
      const SweepResult r = sweep_cci_distance(c);
      write_sweep_csv(c.out_dir + "/sweep_cci.csv", r, c, "d_cci_m");
      flush_records(c, r);
      write_manifest(c.out_dir + "/manifest.json", c,
                     {"sweep_cci.csv", "runs.jsonl"});
      break;
    }
    case SweepKind::topologies: {
      const CdfResult r = topology_cdf(c);
      write_cdf_csv(c.out_dir + "/cdf.csv", r, c);
      write_manifest(c.out_dir + "/manifest.json", c, {"cdf.csv"});
      break;
    }
    default:
      std::cerr << "campaign file must define a sweep\n";
      return 1;
  }
  std::cout << "wrote outputs to " << c.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex small cell beamformer design and experiments"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string campaign_file;
  std::vector<double> si_list = {-130, -120, -110, -100, -90, -80, -70, -60, -55};
  std::vector<double> cci_list_m = {20, 40, 60, 80, 100, 130, 160};
  int topo_count = 100;
  std::uint64_t converge_trial = 0;

  CLI::App* run = app.add_subcommand("run", "execute a campaign JSON file");
  run->add_option("campaign", campaign_file, "campaign JSON")->required();
  add_common(run, common);

  CLI::App* si = app.add_subcommand("sweep-si", "SE gain vs residual SI power");
  si->add_option("--si-db", si_list, "sigma_si^2 values in dB");
  add_common(si, common);

  CLI::App* cdf = app.add_subcommand("cdf", "gain CDF over random topologies");
  cdf->add_option("--topologies", topo_count, "number of topologies");
  add_common(cdf, common);

  CLI::App* cci = app.add_subcommand("cci-sweep", "SE vs UL-to-DL user distance");
  cci->add_option("--d-m", cci_list_m, "distances in meters");
  add_common(cci, common);

  CLI::App* conv = app.add_subcommand("converge", "per-iteration traces");
  conv->add_option("--trial", converge_trial, "channel realization index");
  add_common(conv, common);

  CLI::App* blind = app.add_subcommand("cci-blind", "CCI-aware vs CCI-blind");
  blind->add_option("--topologies", topo_count, "number of topologies");
  add_common(blind, common);

  CLI::App* timing = app.add_subcommand("timing", "solver wall-clock ladders");
  add_common(timing, common);
  std::vector<int> ntx_ladder = {2, 4, 6};
  std::vector<int> kdl_ladder = {2, 4, 6};
  timing->add_option("--ntx", ntx_ladder, "N_T ladder");
  timing->add_option("--kdl", kdl_ladder, "K_D ladder");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(campaign_file, common);

    Campaign c = make_campaign(common);
    if (si->parsed()) {
      c.kind = SweepKind::sigma_si;
      c.sigma_si_db = si_list;
      const SweepResult r = sweep_sigma_si(c);
      write_sweep_csv(c.out_dir + "/sweep_si.csv", r, c, "sigma_si_db");
      flush_records(c, r);
      write_manifest(c.out_dir + "/manifest.json", c,
                     {"sweep_si.csv", "runs.jsonl"});
    } else if (cdf->parsed()) {
      c.kind = SweepKind::topologies;
      c.topology_count = topo_count;
      if (c.trials == 50) c.trials = 10;  // channel trials per topology
      const CdfResult r = topology_cdf(c);
      write_cdf_csv(c.out_dir + "/cdf.csv", r, c);
      write_manifest(c.out_dir + "/manifest.json", c, {"cdf.csv"});
    } else if (cci->parsed()) {
      c.kind = SweepKind::cci_distance;
      for (double m : cci_list_m) c.cci_distance_km.push_back(m / 1000.0);
      const SweepResult r = sweep_cci_distance(c);
      write_sweep_csv(c.out_dir + "/sweep_cci.csv", r, c, "d_cci_m");
      flush_records(c, r);
      write_manifest(c.out_dir + "/manifest.json", c,
                     {"sweep_cci.csv", "runs.jsonl"});
    } else if (conv->parsed()) {
      const ConvergenceReport r = convergence_report(c.base, converge_trial);
      write_convergence_csv(c.out_dir + "/convergence.csv", r, c.base);
      write_manifest(c.out_dir + "/manifest.json", c, {"convergence.csv"});
    } else if (blind->parsed()) {
      c.kind = SweepKind::topologies;
      c.topology_count = topo_count;
      if (c.trials == 50) c.trials = 10;
      const CciBlindResult r = compare_cci_blind(c);
      write_cci_blind_csv(c.out_dir + "/cci_blind.csv", r, c);
      write_manifest(c.out_dir + "/manifest.json", c, {"cci_blind.csv"});
    } else if (timing->parsed()) {
      const int trials = c.trials == 50 ? 1 : c.trials;
      const auto rows = timing_report(c.base, ntx_ladder, kdl_ladder, trials);
      write_timing_csv(c.out_dir + "/timing.csv", rows, c.base, trials);
      write_manifest(c.out_dir + "/manifest.json", c, {"timing.csv"});
    }
    std::cout << "wrote outputs to " << common.out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
