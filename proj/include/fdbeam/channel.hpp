#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fdbeam/config.hpp"
#include "fdbeam/rng.hpp"

namespace fdbeam {

// Planar user drop, BS at the origin, coordinates in km.
struct Topology {
  std::vector<Eigen::Vector2d> dl_positions;
  std::vector<Eigen::Vector2d> ul_positions;
};

// One realization of all channels. Immutable after creation; safe to share
// across threads.
struct ChannelSet {
  std::vector<Eigen::VectorXcd> h_dl;  // K_D vectors of length N_T
  std::vector<Eigen::VectorXcd> h_ul;  // K_U vectors of length N_R
  Eigen::MatrixXcd g_cci;              // K_U x K_D, entry (j,i) = g_ji
  Eigen::MatrixXcd h_si;               // N_R x N_T
  double sigma_n2_dl = 1.0;            // noise power at DL users, Watts
  double sigma_n2_bs = 1.0;            // noise power at the BS, Watts
  Eigen::VectorXd kappa_dl;            // large-scale factors (1.0 in iid mode)
  Eigen::VectorXd kappa_ul;

  int n_tx() const { return h_dl.empty() ? static_cast<int>(h_si.cols()) : static_cast<int>(h_dl[0].size()); }
  int n_rx() const { return h_ul.empty() ? static_cast<int>(h_si.rows()) : static_cast<int>(h_ul[0].size()); }
  int k_dl() const { return static_cast<int>(h_dl.size()); }
  int k_ul() const { return static_cast<int>(h_ul.size()); }
};

// LOS path loss in dB, d in km. Throws std::domain_error for d <= 0.
double path_loss_los_db(double d_km);

// NLOS path loss in dB, d in km (user-to-user links).
double path_loss_nlos_db(double d_km);

struct NoisePower {
  double dbm;
  double watts;
};

// Thermal noise floor (-174 dBm/Hz) over `bandwidth_hz` plus noise figure.
NoisePower noise_power(double bandwidth_hz, double nf_db);

// Area-uniform drop over the disk of radius cell_radius_km.
Topology draw_topology(const ScenarioConfig& cfg, Rng& rng);

// Realistic-mode channels: LOS path loss on BS-user links, NLOS on user-user
// links, Rician self-interference with mean sqrt(sigma_si2*K/(1+K)) per entry
// and per-entry variance sigma_si2/(1+K).
ChannelSet draw_channels(const ScenarioConfig& cfg, const Topology& topo, Rng& rng);

// i.i.d. mode: all fading entries CN(0,1), unit noise, no path loss.
ChannelSet draw_iid_channels(const ScenarioConfig& cfg, Rng& rng);

// Dispatch on cfg.channel_mode; uses fixed positions from the config when
// provided, otherwise draws a topology from `rng` first.
ChannelSet draw_channels_auto(const ScenarioConfig& cfg, Rng& rng);

}  // namespace fdbeam
