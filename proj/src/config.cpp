#include "fdbeam/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fdbeam/units.hpp"

namespace fdbeam {

using nlohmann::json;

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (n_tx < 1 || n_rx < 1) fail("antenna counts must be >= 1");
  if (k_dl < 0 || k_ul < 0) fail("user counts must be >= 0");
  if (k_dl == 0 && k_ul == 0) fail("at least one user required");
  if (!(p_bs > 0.0) || !(q_bar > 0.0)) fail("power budgets must be > 0");
  if (sigma_si2 < 0.0) fail("sigma_si2 must be >= 0");
  if (rician_k < 0.0) fail("rician_k must be >= 0");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth must be > 0");
  if (!(cell_radius_km > 0.0)) fail("cell radius must be > 0");
  if (fixed_dl_positions_km &&
      static_cast<int>(fixed_dl_positions_km->size()) != k_dl)
    fail("fixed DL positions must match k_dl");
  if (fixed_ul_positions_km &&
      static_cast<int>(fixed_ul_positions_km->size()) != k_ul)
    fail("fixed UL positions must match k_ul");
}

namespace {

std::vector<Eigen::Vector2d> positions_from_json(const json& arr) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& p : arr) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return out;
}

json positions_to_json(const std::vector<Eigen::Vector2d>& pos) {
  json arr = json::array();
  for (const auto& p : pos) arr.push_back({p.x(), p.y()});
  return arr;
}

}  // namespace

ScenarioConfig scenario_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ScenarioConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("n_tx", cfg.n_tx);
  get("n_rx", cfg.n_rx);
  get("k_dl", cfg.k_dl);
  get("k_ul", cfg.k_ul);
  // Power budgets: dBm fields win over linear ones when both appear.
  get("p_bs_w", cfg.p_bs);
  get("q_bar_w", cfg.q_bar);
  if (j.contains("p_bs_dbm")) cfg.p_bs = dbm_to_watts(j.at("p_bs_dbm").get<double>());
  if (j.contains("q_bar_dbm")) cfg.q_bar = dbm_to_watts(j.at("q_bar_dbm").get<double>());
  get("sigma_si2", cfg.sigma_si2);
  if (j.contains("sigma_si2_db")) cfg.sigma_si2 = db_to_linear(j.at("sigma_si2_db").get<double>());
  get("rician_k", cfg.rician_k);
  get("bandwidth_hz", cfg.bandwidth_hz);
  get("nf_dl_db", cfg.nf_dl_db);
  get("nf_bs_db", cfg.nf_bs_db);
  get("cell_radius_km", cfg.cell_radius_km);
  if (j.contains("channel_mode")) {
    const std::string mode = j.at("channel_mode").get<std::string>();
    if (mode == "iid")
      cfg.channel_mode = ChannelMode::iid;
    else if (mode == "realistic")
      cfg.channel_mode = ChannelMode::realistic;
    else
      throw std::invalid_argument("channel_mode must be 'iid' or 'realistic'");
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    auto gs = [&](const char* key, auto& field) {
      if (s.contains(key)) field = s.at(key).get<std::decay_t<decltype(field)>>();
    };
    gs("gap_tol_rel", cfg.solver.gap_tol_rel);
    gs("gap_tol_abs", cfg.solver.gap_tol_abs);
    gs("newton_tol", cfg.solver.newton_tol);
    gs("barrier_growth", cfg.solver.barrier_growth);
    gs("max_newton_total", cfg.solver.max_newton_total);
    gs("max_newton_per_stage", cfg.solver.max_newton_per_stage);
    gs("verbosity", cfg.solver.verbosity);
  }
  if (j.contains("algo")) {
    const json& a = j.at("algo");
    auto ga = [&](const char* key, auto& field) {
      if (a.contains(key)) field = a.at(key).get<std::decay_t<decltype(field)>>();
    };
    ga("stop_epsilon", cfg.algo.stop_epsilon);
    ga("stop_window", cfg.algo.stop_window);
    ga("max_iterations", cfg.algo.max_iterations);
    ga("max_restarts", cfg.algo.max_restarts);
    ga("randomization_samples", cfg.algo.randomization_samples);
    ga("rank1_tol", cfg.algo.rank1_tol);
  }
  if (j.contains("fixed_dl_positions_km"))
    cfg.fixed_dl_positions_km = positions_from_json(j.at("fixed_dl_positions_km"));
  if (j.contains("fixed_ul_positions_km"))
    cfg.fixed_ul_positions_km = positions_from_json(j.at("fixed_ul_positions_km"));
  cfg.validate();
  return cfg;
}

ScenarioConfig scenario_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
  json j;
  j["n_tx"] = cfg.n_tx;
  j["n_rx"] = cfg.n_rx;
  j["k_dl"] = cfg.k_dl;
  j["k_ul"] = cfg.k_ul;
  j["p_bs_w"] = cfg.p_bs;
  j["q_bar_w"] = cfg.q_bar;
  j["sigma_si2"] = cfg.sigma_si2;
  j["rician_k"] = cfg.rician_k;
  j["bandwidth_hz"] = cfg.bandwidth_hz;
  j["nf_dl_db"] = cfg.nf_dl_db;
  j["nf_bs_db"] = cfg.nf_bs_db;
  j["cell_radius_km"] = cfg.cell_radius_km;
  j["channel_mode"] = cfg.channel_mode == ChannelMode::iid ? "iid" : "realistic";
  j["seed"] = cfg.seed;
  j["solver"] = {{"gap_tol_rel", cfg.solver.gap_tol_rel},
                 {"gap_tol_abs", cfg.solver.gap_tol_abs},
                 {"newton_tol", cfg.solver.newton_tol},
                 {"barrier_growth", cfg.solver.barrier_growth},
                 {"max_newton_total", cfg.solver.max_newton_total},
                 {"max_newton_per_stage", cfg.solver.max_newton_per_stage},
                 {"verbosity", cfg.solver.verbosity}};
  j["algo"] = {{"stop_epsilon", cfg.algo.stop_epsilon},
               {"stop_window", cfg.algo.stop_window},
               {"max_iterations", cfg.algo.max_iterations},
               {"max_restarts", cfg.algo.max_restarts},
               {"randomization_samples", cfg.algo.randomization_samples},
               {"rank1_tol", cfg.algo.rank1_tol}};
  if (cfg.fixed_dl_positions_km)
    j["fixed_dl_positions_km"] = positions_to_json(*cfg.fixed_dl_positions_km);
  if (cfg.fixed_ul_positions_km)
    j["fixed_ul_positions_km"] = positions_to_json(*cfg.fixed_ul_positions_km);
  return j.dump();
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string canon = scenario_to_json_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash_hex(const ScenarioConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return std::string(buf);
}

}  // namespace fdbeam
