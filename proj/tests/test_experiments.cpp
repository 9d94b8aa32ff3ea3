#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fdbeam/experiments.hpp"
#include "helpers.hpp"

using namespace fdbeam;

TEST_SUITE_BEGIN("experiments");

namespace {

ScenarioConfig tiny_scenario() {
  ScenarioConfig cfg = test::iid_config(2, 1, 1, 1, 5.0, 5.0, 1e-4);
  cfg.seed = 99;
  cfg.algo.randomization_samples = 50;
  return cfg;
}

}  // namespace

TEST_CASE("config JSON round trip preserves the hash") {
  ScenarioConfig cfg = tiny_scenario();
  const std::string text = scenario_to_json_text(cfg);
  const ScenarioConfig back = scenario_from_json_text(text);
  CHECK(config_hash(cfg) == config_hash(back));
  CHECK(config_hash_hex(cfg).size() == 16);
}

TEST_CASE("dBm and dB scenario fields convert at load") {
  const ScenarioConfig cfg = scenario_from_json_text(
      R"({"n_tx":4,"n_rx":2,"k_dl":2,"k_ul":2,"p_bs_dbm":26,"q_bar_dbm":23,
          "sigma_si2_db":-100,"channel_mode":"realistic"})");
  CHECK(cfg.p_bs == doctest::Approx(0.398107170553).epsilon(1e-9));
  CHECK(cfg.q_bar == doctest::Approx(0.199526231497).epsilon(1e-9));
  CHECK(cfg.sigma_si2 == doctest::Approx(1e-10).epsilon(1e-12));
}

TEST_CASE("invalid scenarios are rejected") {
  CHECK_THROWS_AS(scenario_from_json_text(R"({"n_tx":0})"), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json_text(R"({"p_bs_w":-1.0})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json_text(R"({"channel_mode":"weird"})"),
                  std::invalid_argument);
}

TEST_CASE("trials replay bit-identically from (config, trial index)") {
  const ScenarioConfig cfg = tiny_scenario();
  const TrialResult a = run_trial(cfg, AlgoChoice::maxdet, 3);
  const TrialResult b = run_trial(cfg, AlgoChoice::maxdet, 3);
  CHECK(a.fd_dl == b.fd_dl);
  CHECK(a.fd_ul == b.fd_ul);
  CHECK(a.hd_dl == b.hd_dl);
  CHECK(a.hd_ul == b.hd_ul);
  REQUIRE(a.records.size() == b.records.size());
  // payloads identical; wall-clock timing may differ
  for (size_t i = 0; i < a.records.size(); ++i) {
    const auto ja = nlohmann::json::parse(a.records[i]);
    const auto jb = nlohmann::json::parse(b.records[i]);
    CHECK(ja.at("payload").dump() == jb.at("payload").dump());
  }
}

TEST_CASE("parallel map is deterministic and ordered") {
  const std::function<int(int)> fn = [](int i) { return i * i; };
  const std::vector<int> seq = parallel_map<int>(64, 1, fn);
  const std::vector<int> par = parallel_map<int>(64, 8, fn);
  CHECK(seq == par);
}

TEST_CASE("sweep CSV: totals equal the sum of the direction columns") {
  Campaign c;
  c.base = tiny_scenario();
  c.kind = SweepKind::sigma_si;
  c.sigma_si_db = {-80.0, -20.0};
  c.trials = 2;
  c.jobs = 2;
  c.algorithms = AlgoChoice::maxdet;
  const SweepResult r = sweep_sigma_si(c);
  REQUIRE(r.points.size() == 2);
  const std::string path = "/tmp/fdbeam_test_sweep.csv";
  write_sweep_csv(path, r, c, "sigma_si_db");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // hash comment
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<double> cols;
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    REQUIRE(cols.size() == 13);
    CHECK(cols[3] == doctest::Approx(cols[1] + cols[2]).epsilon(1e-9));  // fd
    CHECK(cols[6] == doctest::Approx(cols[4] + cols[5]).epsilon(1e-9));  // hd
    ++rows;
  }
  CHECK(rows == 2);
  std::remove(path.c_str());
}

TEST_CASE("gain ordering: zero SI beats strong SI on the same draws") {
  Campaign c;
  c.base = tiny_scenario();
  c.kind = SweepKind::sigma_si;
  c.sigma_si_db = {-120.0, 0.0};
  c.trials = 3;
  c.jobs = 0;
  c.algorithms = AlgoChoice::maxdet;
  const SweepResult r = sweep_sigma_si(c);
  CHECK(r.points[0].fd_total > r.points[1].fd_total);
}

TEST_CASE("spearman rank statistics") {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> y_down, y_up;
  for (double v : x) {
    y_down.push_back(10.0 - v);
    y_up.push_back(v * v);
  }
  CHECK(spearman_rho(x, y_down) == doctest::Approx(-1.0));
  CHECK(spearman_rho(x, y_up) == doctest::Approx(1.0));
  CHECK(spearman_perm_pvalue(x, y_down, true) < 0.05);
  CHECK(spearman_perm_pvalue(x, y_up, true) > 0.5);
  // ties get average ranks
  CHECK(spearman_rho({1, 1, 2, 2}, {1, 1, 2, 2}) == doctest::Approx(1.0));
}

TEST_CASE("convergence report carries both algorithms") {
  ScenarioConfig cfg = tiny_scenario();
  const ConvergenceReport rep = convergence_report(cfg, 0);
  CHECK(rep.maxdet.size() >= 10);
  CHECK(rep.spca.size() >= 10);
  for (size_t k = 1; k < rep.maxdet.size(); ++k)
    CHECK(rep.maxdet[k].surrogate >= rep.maxdet[k - 1].surrogate - 1e-9);
}

TEST_CASE("run records replay from the manifest data") {
  const ScenarioConfig cfg = tiny_scenario();
  const TrialResult t = run_trial(cfg, AlgoChoice::spca, 7);
  REQUIRE(t.records.size() == 1);
  const auto j = nlohmann::json::parse(t.records[0]);
  CHECK(j.at("payload").at("config_hash").get<std::string>() ==
        config_hash_hex(cfg));
  CHECK(j.at("payload").at("trial").get<std::uint64_t>() == 7);
  // regenerate from the recorded identifiers
  ScenarioConfig replay =
      scenario_from_json_text(scenario_to_json_text(cfg));
  const TrialResult t2 = run_trial(replay, AlgoChoice::spca, 7);
  const auto j2 = nlohmann::json::parse(t2.records[0]);
  CHECK(j.at("payload").dump() == j2.at("payload").dump());
}

TEST_SUITE_END();
