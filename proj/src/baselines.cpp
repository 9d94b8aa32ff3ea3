#include "fdbeam/baselines.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace fdbeam {

HalfDuplexResult half_duplex_total(double dl_se, double ul_se) {
  HalfDuplexResult r;
  r.dl_se = dl_se;
  r.ul_se = ul_se;
  r.dl_halved = dl_se / 2.0;
  r.ul_halved = ul_se / 2.0;
  r.total = (dl_se + ul_se) / 2.0;
  return r;
}

ChannelSet half_duplex_channels(const ChannelSet& fd, const ScenarioConfig& cfg,
                                Rng& rng) {
  const int n = cfg.n_tx + cfg.n_rx;
  ChannelSet hd;
  hd.sigma_n2_dl = fd.sigma_n2_dl;
  hd.sigma_n2_bs = fd.sigma_n2_bs;
  hd.kappa_dl = fd.kappa_dl;
  hd.kappa_ul = fd.kappa_ul;
  auto extend = [&](const Eigen::VectorXcd& h, double kappa, int total) {
    Eigen::VectorXcd out(total);
    out.head(h.size()) = h;
    const double amp = std::sqrt(kappa);
    for (int e = static_cast<int>(h.size()); e < total; ++e)
      out[e] = amp * rng.cnormal();
    return out;
  };
  for (int i = 0; i < fd.k_dl(); ++i)
    hd.h_dl.push_back(extend(fd.h_dl[i], fd.kappa_dl[i], n));
  for (int j = 0; j < fd.k_ul(); ++j)
    hd.h_ul.push_back(extend(fd.h_ul[j], fd.kappa_ul[j], n));
  hd.g_cci = Eigen::MatrixXcd::Zero(fd.k_ul(), fd.k_dl());
  hd.h_si = Eigen::MatrixXcd::Zero(n, n);
  return hd;
}

IwfResult uplink_iwf(const ChannelSet& ch, const Eigen::VectorXd& q_bar,
                     double tol) {
  const int k = ch.k_ul();
  const int n = ch.n_rx();
  IwfResult res;
  res.powers = Eigen::VectorXd::Zero(k);
  auto sum_rate = [&]() {
    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(n, n);
    for (int j = 0; j < k; ++j)
      cov += res.powers[j] / ch.sigma_n2_bs * ch.h_ul[j] * ch.h_ul[j].adjoint();
    Eigen::LLT<Eigen::MatrixXcd> llt(cov);
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += std::log2(llt.matrixLLT()(i, i).real());
    return 2.0 * v;
  };
  double prev = 0.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    for (int j = 0; j < k; ++j) {
      // A scalar power against fixed interference has a rate increasing in
      // q_j; the unconstrained water level clips at the cap.
      res.powers[j] = q_bar[j];
    }
    ++res.sweeps;
    const double rate = sum_rate();
    if (rate - prev < tol) {
      res.se_bits = rate;
      return res;
    }
    prev = rate;
  }
  res.se_bits = prev;
  return res;
}

Solution downlink_semax_hd(const ScenarioConfig& cfg, const ChannelSet& hd_ch,
                           Rng& rng) {
  ScenarioConfig dl_cfg = cfg;
  dl_cfg.n_tx = hd_ch.n_tx();
  dl_cfg.n_rx = hd_ch.n_rx();
  dl_cfg.k_ul = 0;
  dl_cfg.sigma_si2 = 0.0;
  ChannelSet dl_ch = hd_ch;
  dl_ch.h_ul.clear();
  dl_ch.g_cci = Eigen::MatrixXcd::Zero(0, dl_cfg.k_dl);
  dl_ch.kappa_ul = Eigen::VectorXd::Zero(0);
  return run_iterative_spca(dl_cfg, dl_ch, rng);
}

HalfDuplexResult run_half_duplex(const ScenarioConfig& cfg, const ChannelSet& fd,
                                 Rng& rng) {
  const ChannelSet hd = half_duplex_channels(fd, cfg, rng);
  const IwfResult ul = uplink_iwf(hd, cfg.q_bar_vector());
  double dl_se = 0.0;
  if (cfg.k_dl > 0) {
    const Solution dl = downlink_semax_hd(cfg, hd, rng);
    dl_se = dl.extracted_rates.dl_total_bits;
  }
  return half_duplex_total(dl_se, ul.se_bits);
}

}  // namespace fdbeam
