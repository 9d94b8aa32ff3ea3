#pragma once

#include "fdbeam/algorithms.hpp"
#include "fdbeam/channel.hpp"

namespace fdbeam {

// Half-duplex reference: time-shared downlink and uplink, each using all
// N_T + N_R antennas, no self-interference and no cross-link interference.
struct HalfDuplexResult {
  double dl_se = 0.0;         // pre-halving, bits/s/Hz
  double ul_se = 0.0;         // pre-halving
  double dl_halved = 0.0;
  double ul_halved = 0.0;
  double total = 0.0;         // (dl + ul) / 2
};

HalfDuplexResult half_duplex_total(double dl_se, double ul_se);

// Extends every user's channel vector to N_T + N_R antennas. The added
// coefficients are drawn fresh from `rng` with the user's large-scale factor;
// CCI and SI are removed.
ChannelSet half_duplex_channels(const ChannelSet& fd, const ScenarioConfig& cfg,
                                Rng& rng);

struct IwfResult {
  Eigen::VectorXd powers;
  double se_bits = 0.0;  // MAC sum rate log2 det(I + sum q h h^H / sigma^2)
  int sweeps = 0;
};

// Cyclic per-user best response under per-user caps. With one scalar power
// per user the rate is increasing in q_j, so each inner step clips to the
// cap; the loop structure is kept for the sum-rate bookkeeping.
IwfResult uplink_iwf(const ChannelSet& ch, const Eigen::VectorXd& q_bar,
                     double tol = 1e-9);

// Downlink-only sum-SE maximization under the BS power budget: the SPCA
// machinery specialized to K_U = 0. Returns the full solution (extracted SE
// is the headline number for the half-duplex comparisons).
Solution downlink_semax_hd(const ScenarioConfig& cfg, const ChannelSet& hd_ch,
                           Rng& rng);

// Convenience driver: augment channels, run UL water-filling and DL SEMax,
// apply the 50% time share.
HalfDuplexResult run_half_duplex(const ScenarioConfig& cfg, const ChannelSet& fd,
                                 Rng& rng);

}  // namespace fdbeam
