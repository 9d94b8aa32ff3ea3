#pragma once

#include <Eigen/Dense>

#include "fdbeam/channel.hpp"
#include "fdbeam/rate.hpp"
#include "fdbeam/rng.hpp"

namespace fdbeam::test {

inline ScenarioConfig iid_config(int n_tx, int n_rx, int k_dl, int k_ul,
                                 double p_bs = 10.0, double q_bar = 10.0,
                                 double sigma_si2 = 1.0) {
  ScenarioConfig cfg;
  cfg.n_tx = n_tx;
  cfg.n_rx = n_rx;
  cfg.k_dl = k_dl;
  cfg.k_ul = k_ul;
  cfg.p_bs = p_bs;
  cfg.q_bar = q_bar;
  cfg.sigma_si2 = sigma_si2;
  cfg.channel_mode = ChannelMode::iid;
  return cfg;
}

inline Eigen::MatrixXcd random_psd(int n, Rng& rng) {
  Eigen::MatrixXcd a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = rng.cnormal();
  return a * a.adjoint();
}

// Random feasible design: PSD covariances scaled to a random fraction of the
// budget, uniform UL powers.
inline Design random_design(const ScenarioConfig& cfg, Rng& rng) {
  Design d;
  double total = 0.0;
  for (int i = 0; i < cfg.k_dl; ++i) {
    d.q_dl.push_back(random_psd(cfg.n_tx, rng));
    total += d.q_dl.back().real().trace();
  }
  const double budget = cfg.p_bs * rng.uniform(0.1, 0.95);
  if (total > 0.0)
    for (auto& q : d.q_dl) q *= budget / total;
  d.q_ul.resize(cfg.k_ul);
  for (int j = 0; j < cfg.k_ul; ++j) d.q_ul[j] = rng.uniform(0.0, cfg.q_bar);
  return d;
}

// Minimal hand-built channel set for closed-form cases.
inline ChannelSet make_channels(std::vector<Eigen::VectorXcd> h_dl,
                                std::vector<Eigen::VectorXcd> h_ul,
                                Eigen::MatrixXcd g_cci, Eigen::MatrixXcd h_si,
                                double sigma_dl = 1.0, double sigma_bs = 1.0) {
  ChannelSet ch;
  ch.h_dl = std::move(h_dl);
  ch.h_ul = std::move(h_ul);
  ch.g_cci = std::move(g_cci);
  ch.h_si = std::move(h_si);
  ch.sigma_n2_dl = sigma_dl;
  ch.sigma_n2_bs = sigma_bs;
  ch.kappa_dl = Eigen::VectorXd::Ones(ch.k_dl());
  ch.kappa_ul = Eigen::VectorXd::Ones(ch.k_ul());
  return ch;
}

}  // namespace fdbeam::test
