#include "fdbeam/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "fdbeam/units.hpp"

namespace fdbeam {

namespace {
// Path-loss floor: drops closer than 1 m to the BS (or to each other) are
// evaluated at 1 m to keep the models finite.
constexpr double kMinDistanceKm = 0.001;
}  // namespace

double path_loss_los_db(double d_km) {
  if (!(d_km > 0.0)) throw std::domain_error("path_loss_los_db: distance must be > 0");
  return 103.8 + 20.9 * std::log10(d_km);
}

double path_loss_nlos_db(double d_km) {
  if (!(d_km > 0.0)) throw std::domain_error("path_loss_nlos_db: distance must be > 0");
  return 145.4 + 37.5 * std::log10(d_km);
}

NoisePower noise_power(double bandwidth_hz, double nf_db) {
  if (!(bandwidth_hz > 0.0))
    throw std::domain_error("noise_power: bandwidth must be > 0");
  NoisePower n;
  n.dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + nf_db;
  n.watts = dbm_to_watts(n.dbm);
  return n;
}

Topology draw_topology(const ScenarioConfig& cfg, Rng& rng) {
  Topology topo;
  auto draw = [&]() {
    const double radius = cfg.cell_radius_km * std::sqrt(rng.uniform());
    const double angle = 6.283185307179586 * rng.uniform();
    return Eigen::Vector2d(radius * std::cos(angle), radius * std::sin(angle));
  };
  topo.dl_positions.reserve(cfg.k_dl);
  topo.ul_positions.reserve(cfg.k_ul);
  for (int i = 0; i < cfg.k_dl; ++i) topo.dl_positions.push_back(draw());
  for (int j = 0; j < cfg.k_ul; ++j) topo.ul_positions.push_back(draw());
  return topo;
}

namespace {

Eigen::VectorXcd cgaussian_vector(int n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.cnormal();
  return v;
}

double los_kappa(const Eigen::Vector2d& pos) {
  const double d = std::max(pos.norm(), kMinDistanceKm);
  return db_to_linear(-path_loss_los_db(d));
}

Eigen::MatrixXcd draw_si_matrix(const ScenarioConfig& cfg, Rng& rng) {
  // Rician: per-entry mean sqrt(sigma_si2*K/(1+K)) (all-ones deterministic
  // part), per-entry variance sigma_si2/(1+K).
  const double mean = std::sqrt(cfg.sigma_si2 * cfg.rician_k / (1.0 + cfg.rician_k));
  const double stddev = std::sqrt(cfg.sigma_si2 / (1.0 + cfg.rician_k));
  Eigen::MatrixXcd h(cfg.n_rx, cfg.n_tx);
  for (int r = 0; r < cfg.n_rx; ++r)
    for (int c = 0; c < cfg.n_tx; ++c) h(r, c) = mean + stddev * rng.cnormal();
  return h;
}

}  // namespace

ChannelSet draw_channels(const ScenarioConfig& cfg, const Topology& topo, Rng& rng) {
  if (static_cast<int>(topo.dl_positions.size()) != cfg.k_dl ||
      static_cast<int>(topo.ul_positions.size()) != cfg.k_ul)
    throw std::invalid_argument("draw_channels: topology does not match config");

  ChannelSet ch;
  ch.kappa_dl.resize(cfg.k_dl);
  ch.kappa_ul.resize(cfg.k_ul);
  ch.h_dl.reserve(cfg.k_dl);
  ch.h_ul.reserve(cfg.k_ul);
  for (int i = 0; i < cfg.k_dl; ++i) {
    ch.kappa_dl[i] = los_kappa(topo.dl_positions[i]);
    ch.h_dl.push_back(std::sqrt(ch.kappa_dl[i]) * cgaussian_vector(cfg.n_tx, rng));
  }
  for (int j = 0; j < cfg.k_ul; ++j) {
    ch.kappa_ul[j] = los_kappa(topo.ul_positions[j]);
    ch.h_ul.push_back(std::sqrt(ch.kappa_ul[j]) * cgaussian_vector(cfg.n_rx, rng));
  }
  ch.g_cci.resize(cfg.k_ul, cfg.k_dl);
  for (int j = 0; j < cfg.k_ul; ++j) {
    for (int i = 0; i < cfg.k_dl; ++i) {
      const double d = std::max(
          (topo.ul_positions[j] - topo.dl_positions[i]).norm(), kMinDistanceKm);
      const double kappa = db_to_linear(-path_loss_nlos_db(d));
      ch.g_cci(j, i) = std::sqrt(kappa) * rng.cnormal();
    }
  }
  ch.h_si = draw_si_matrix(cfg, rng);
  ch.sigma_n2_dl = noise_power(cfg.bandwidth_hz, cfg.nf_dl_db).watts;
  ch.sigma_n2_bs = noise_power(cfg.bandwidth_hz, cfg.nf_bs_db).watts;
  return ch;
}

ChannelSet draw_iid_channels(const ScenarioConfig& cfg, Rng& rng) {
  ChannelSet ch;
  ch.kappa_dl = Eigen::VectorXd::Ones(cfg.k_dl);
  ch.kappa_ul = Eigen::VectorXd::Ones(cfg.k_ul);
  for (int i = 0; i < cfg.k_dl; ++i) ch.h_dl.push_back(cgaussian_vector(cfg.n_tx, rng));
  for (int j = 0; j < cfg.k_ul; ++j) ch.h_ul.push_back(cgaussian_vector(cfg.n_rx, rng));
  ch.g_cci.resize(cfg.k_ul, cfg.k_dl);
  for (int j = 0; j < cfg.k_ul; ++j)
    for (int i = 0; i < cfg.k_dl; ++i) ch.g_cci(j, i) = rng.cnormal();
  ch.h_si = draw_si_matrix(cfg, rng);
  ch.sigma_n2_dl = 1.0;
  ch.sigma_n2_bs = 1.0;
  return ch;
}

ChannelSet draw_channels_auto(const ScenarioConfig& cfg, Rng& rng) {
  if (cfg.channel_mode == ChannelMode::iid) return draw_iid_channels(cfg, rng);
  Topology topo;
  if (cfg.fixed_dl_positions_km && cfg.fixed_ul_positions_km) {
    topo.dl_positions = *cfg.fixed_dl_positions_km;
    topo.ul_positions = *cfg.fixed_ul_positions_km;
  } else {
    topo = draw_topology(cfg, rng);
  }
  return draw_channels(cfg, topo, rng);
}

}  // namespace fdbeam
