#include "fdbeam/rate.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "fdbeam/units.hpp"

namespace fdbeam {

namespace {

double logdet_pd(const Eigen::MatrixXcd& m) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("logdet_pd: matrix not positive definite");
  double s = 0.0;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < m.rows(); ++i) s += std::log(l(i, i).real());
  return 2.0 * s;
}

Eigen::MatrixXcd inverse_pd(const Eigen::MatrixXcd& m) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("inverse_pd: matrix not positive definite");
  return llt.solve(Eigen::MatrixXcd::Identity(m.rows(), m.cols()));
}

double quad_form(const Eigen::VectorXcd& h, const Eigen::MatrixXcd& q) {
  return h.dot(q * h).real();
}

}  // namespace

double Design::dl_power() const {
  double p = 0.0;
  for (const auto& q : q_dl) p += q.real().trace();
  return p;
}

Design Design::zero(int k_dl, int n_tx, int k_ul) {
  Design d;
  d.q_dl.assign(k_dl, Eigen::MatrixXcd::Zero(n_tx, n_tx));
  d.q_ul = Eigen::VectorXd::Zero(k_ul);
  return d;
}

void hermitize(Design& d) {
  for (auto& q : d.q_dl) q = 0.5 * (q + q.adjoint()).eval();
}

bool design_feasible(const Design& d, double p_bs, const Eigen::VectorXd& q_bar,
                     double tol) {
  double total = 0.0;
  for (const auto& q : d.q_dl) {
    const double tr = q.real().trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol * std::max(tr, 1e-300)) return false;
    total += tr;
  }
  if (total > p_bs + tol * std::max(1.0, p_bs)) return false;
  for (int j = 0; j < d.q_ul.size(); ++j)
    if (d.q_ul[j] < -tol || d.q_ul[j] > q_bar[j] + tol * std::max(1.0, q_bar[j]))
      return false;
  return true;
}

double dl_interference(int i, const ChannelSet& ch, const Design& d) {
  double v = ch.sigma_n2_dl;
  for (int k = 0; k < d.k_dl(); ++k)
    if (k != i) v += quad_form(ch.h_dl[i], d.q_dl[k]);
  for (int j = 0; j < d.k_ul(); ++j)
    v += d.q_ul[j] * std::norm(ch.g_cci(j, i));
  return v;
}

double dl_signal_plus_interference(int i, const ChannelSet& ch, const Design& d) {
  return dl_interference(i, ch, d) + quad_form(ch.h_dl[i], d.q_dl[i]);
}

Eigen::MatrixXcd si_covariance(const ChannelSet& ch, const Design& d) {
  const int nr = ch.n_rx();
  Eigen::MatrixXcd m = ch.sigma_n2_bs * Eigen::MatrixXcd::Identity(nr, nr);
  for (const auto& q : d.q_dl) m += ch.h_si * q * ch.h_si.adjoint();
  return m;
}

Eigen::MatrixXcd ul_covariance(const ChannelSet& ch, const Design& d) {
  Eigen::MatrixXcd m = si_covariance(ch, d);
  for (int j = 0; j < d.k_ul(); ++j)
    m += d.q_ul[j] * ch.h_ul[j] * ch.h_ul[j].adjoint();
  return m;
}

Eigen::MatrixXcd ul_sic_covariance(int j, const ChannelSet& ch, const Design& d) {
  Eigen::MatrixXcd m = si_covariance(ch, d);
  for (int m_idx = j + 1; m_idx < d.k_ul(); ++m_idx)
    m += d.q_ul[m_idx] * ch.h_ul[m_idx] * ch.h_ul[m_idx].adjoint();
  return m;
}

double downlink_sinr(int i, const ChannelSet& ch, const Design& d) {
  if (i < 0 || i >= ch.k_dl()) throw std::out_of_range("downlink_sinr: user index");
  return quad_form(ch.h_dl[i], d.q_dl[i]) / dl_interference(i, ch, d);
}

double uplink_sinr(int j, const ChannelSet& ch, const Design& d) {
  if (j < 0 || j >= ch.k_ul()) throw std::out_of_range("uplink_sinr: user index");
  const Eigen::MatrixXcd cov = ul_sic_covariance(j, ch, d);
  Eigen::LLT<Eigen::MatrixXcd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("uplink_sinr: interference covariance not PD");
  return d.q_ul[j] * ch.h_ul[j].dot(llt.solve(ch.h_ul[j])).real();
}

double downlink_se(const ChannelSet& ch, const Design& d) {
  double se = 0.0;
  for (int i = 0; i < ch.k_dl(); ++i) se += std::log2(1.0 + downlink_sinr(i, ch, d));
  return se;
}

double downlink_se_ratio_form(const ChannelSet& ch, const Design& d) {
  double se = 0.0;
  for (int i = 0; i < ch.k_dl(); ++i)
    se += std::log2(dl_signal_plus_interference(i, ch, d) / dl_interference(i, ch, d));
  return se;
}

double uplink_se(const ChannelSet& ch, const Design& d) {
  double se = 0.0;
  for (int j = 0; j < ch.k_ul(); ++j) se += std::log2(1.0 + uplink_sinr(j, ch, d));
  return se;
}

double uplink_se_det(const ChannelSet& ch, const Design& d) {
  if (ch.k_ul() == 0) return 0.0;
  return (logdet_pd(ul_covariance(ch, d)) - logdet_pd(si_covariance(ch, d))) / LN2;
}

RateBreakdown rate_breakdown(const ChannelSet& ch, const Design& d) {
  RateBreakdown r;
  r.dl_sinr.resize(ch.k_dl());
  r.dl_rate_bits.resize(ch.k_dl());
  r.ul_sinr.resize(ch.k_ul());
  r.ul_rate_bits.resize(ch.k_ul());
  for (int i = 0; i < ch.k_dl(); ++i) {
    r.dl_sinr[i] = downlink_sinr(i, ch, d);
    r.dl_rate_bits[i] = std::log2(1.0 + r.dl_sinr[i]);
    r.dl_total_bits += r.dl_rate_bits[i];
  }
  for (int j = 0; j < ch.k_ul(); ++j) {
    r.ul_sinr[j] = uplink_sinr(j, ch, d);
    r.ul_rate_bits[j] = std::log2(1.0 + r.ul_sinr[j]);
    r.ul_total_bits += r.ul_rate_bits[j];
  }
  return r;
}

double dc_h(const ChannelSet& ch, const Design& d) {
  double v = logdet_pd(ul_covariance(ch, d));
  for (int i = 0; i < ch.k_dl(); ++i)
    v += std::log(dl_signal_plus_interference(i, ch, d));
  return v;
}

double dc_g(const ChannelSet& ch, const Design& d) {
  double v = logdet_pd(si_covariance(ch, d));
  for (int i = 0; i < ch.k_dl(); ++i) v += std::log(dl_interference(i, ch, d));
  return v;
}

DcGradient dc_h_grad(const ChannelSet& ch, const Design& d) {
  DcGradient grad;
  const Eigen::MatrixXcd cov_inv = inverse_pd(ul_covariance(ch, d));
  const Eigen::MatrixXcd si_part = ch.h_si.adjoint() * cov_inv * ch.h_si;
  grad.wrt_q_dl.assign(ch.k_dl(), si_part);
  Eigen::VectorXd s(ch.k_dl());
  for (int i = 0; i < ch.k_dl(); ++i) {
    s[i] = dl_signal_plus_interference(i, ch, d);
    const Eigen::MatrixXcd outer = ch.h_dl[i] * ch.h_dl[i].adjoint() / s[i];
    for (int k = 0; k < ch.k_dl(); ++k) grad.wrt_q_dl[k] += outer;
  }
  grad.wrt_q_ul.resize(ch.k_ul());
  for (int j = 0; j < ch.k_ul(); ++j) {
    double v = ch.h_ul[j].dot(cov_inv * ch.h_ul[j]).real();
    for (int i = 0; i < ch.k_dl(); ++i) v += std::norm(ch.g_cci(j, i)) / s[i];
    grad.wrt_q_ul[j] = v;
  }
  return grad;
}

DcGradient dc_g_grad(const ChannelSet& ch, const Design& d) {
  DcGradient grad;
  const Eigen::MatrixXcd theta_inv = inverse_pd(si_covariance(ch, d));
  const Eigen::MatrixXcd si_part = ch.h_si.adjoint() * theta_inv * ch.h_si;
  grad.wrt_q_dl.assign(ch.k_dl(), si_part);
  Eigen::VectorXd theta(ch.k_dl());
  for (int i = 0; i < ch.k_dl(); ++i) {
    theta[i] = dl_interference(i, ch, d);
    const Eigen::MatrixXcd outer = ch.h_dl[i] * ch.h_dl[i].adjoint() / theta[i];
    for (int k = 0; k < ch.k_dl(); ++k)
      if (k != i) grad.wrt_q_dl[k] += outer;
  }
  grad.wrt_q_ul.resize(ch.k_ul());
  for (int j = 0; j < ch.k_ul(); ++j) {
    double v = 0.0;
    for (int i = 0; i < ch.k_dl(); ++i) v += std::norm(ch.g_cci(j, i)) / theta[i];
    grad.wrt_q_ul[j] = v;
  }
  return grad;
}

double dc_g_affine(const ChannelSet& ch, const Design& at, const Design& expansion) {
  double v = dc_g(ch, expansion);
  const DcGradient grad = dc_g_grad(ch, expansion);
  for (int k = 0; k < ch.k_dl(); ++k)
    v += (grad.wrt_q_dl[k] * (at.q_dl[k] - expansion.q_dl[k])).trace().real();
  for (int j = 0; j < ch.k_ul(); ++j)
    v += grad.wrt_q_ul[j] * (at.q_ul[j] - expansion.q_ul[j]);
  return v;
}

}  // namespace fdbeam
