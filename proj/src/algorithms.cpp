#include "fdbeam/algorithms.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "fdbeam/units.hpp"

namespace fdbeam {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

InitState initialize(const ScenarioConfig& cfg, const ChannelSet& ch, Rng& rng) {
  InitState st;
  // Wishart-style random covariances, scaled into the budget if needed.
  double total = 0.0;
  for (int i = 0; i < cfg.k_dl; ++i) {
    Eigen::MatrixXcd a(cfg.n_tx, cfg.n_tx);
    for (int r = 0; r < cfg.n_tx; ++r)
      for (int c = 0; c < cfg.n_tx; ++c) a(r, c) = rng.cnormal();
    Eigen::MatrixXcd q = a * a.adjoint();
    st.design.q_dl.push_back(q);
    total += q.real().trace();
  }
  if (total > cfg.p_bs) {
    const double scale = cfg.p_bs / total;
    for (auto& q : st.design.q_dl) q *= scale;
  }
  st.design.q_ul.resize(cfg.k_ul);
  for (int j = 0; j < cfg.k_ul; ++j) st.design.q_ul[j] = rng.uniform(0.0, cfg.q_bar);
  st.x0 = st.design.q_ul.cwiseSqrt();
  st.t0.resize(cfg.k_dl);
  st.beta0.resize(cfg.k_dl);
  st.psi0.resize(cfg.k_dl);
  for (int i = 0; i < cfg.k_dl; ++i) {
    st.t0[i] = 1.0 + downlink_sinr(i, ch, st.design);
    st.beta0[i] = dl_interference(i, ch, st.design);
    st.psi0[i] = st.t0[i] / st.beta0[i];
  }
  return st;
}

bool stopping_rule(const std::vector<double>& u, double epsilon, int window,
                   int max_iterations) {
  const int n = static_cast<int>(u.size());
  if (n >= max_iterations) return true;
  if (n < window) return false;
  return u.back() - u[n - window] < epsilon;
}

RankDiagnostic check_rank1(const Eigen::MatrixXcd& q, double tol) {
  RankDiagnostic diag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(q, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();  // ascending
  const int n = static_cast<int>(ev.size());
  const double l1 = std::max(ev[n - 1], 0.0);
  const double l2 = n > 1 ? std::max(ev[n - 2], 0.0) : 0.0;
  diag.eig_ratio = l1 > 0.0 ? l2 / l1 : 0.0;
  diag.is_rank1 = diag.eig_ratio <= tol;
  return diag;
}

ExtractionResult randomize_rank1(const Design& design, const ChannelSet& ch,
                                 int n_samples, Rng& rng) {
  ExtractionResult res;
  const int k_dl = design.k_dl();
  if (k_dl == 0) {
    res.rates = rate_breakdown(ch, design);
    return res;
  }
  std::vector<Eigen::MatrixXcd> sqrt_factors;  // U * Sigma^{1/2}
  for (const auto& q : design.q_dl) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(q);
    Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    // Eigenvalues at rounding level are zero; keeps rank-1 inputs exact.
    const double floor = 1e-14 * ev.maxCoeff();
    ev = (ev.array() < floor).select(0.0, ev);
    sqrt_factors.push_back(eig.eigenvectors() * ev.cwiseSqrt().asDiagonal());
  }
  Design candidate = design;
  double best = -1.0;
  for (int sample = 0; sample < n_samples; ++sample) {
    std::vector<Eigen::VectorXcd> w(k_dl);
    for (int i = 0; i < k_dl; ++i) {
      Eigen::VectorXcd v(ch.n_tx());
      for (int e = 0; e < ch.n_tx(); ++e) v[e] = rng.unit_circle();
      w[i] = sqrt_factors[i] * v;
      candidate.q_dl[i] = w[i] * w[i].adjoint();
    }
    const RateBreakdown rates = rate_breakdown(ch, candidate);
    if (rates.total_bits() > best) {
      best = rates.total_bits();
      res.beamformers = std::move(w);
      res.rates = rates;
      res.best_sample = sample;
    }
  }
  return res;
}

KktResiduals kkt_residual(const Design& design, const SubproblemResult& duals,
                          const ChannelSet& ch, const Design& expansion,
                          double p_bs, const Eigen::VectorXd& q_bar) {
  KktResiduals res;
  if (duals.status != SubStatus::optimal ||
      (design.k_dl() > 0 && duals.z_dual.empty())) {
    res.available = false;
    return res;
  }
  res.available = true;
  const DcGradient gh = dc_h_grad(ch, design);
  const DcGradient gg = dc_g_grad(ch, design);
  const DcGradient gg_exp = dc_g_grad(ch, expansion);
  const int n = ch.n_tx();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);

  for (int i = 0; i < design.k_dl(); ++i) {
    const Eigen::MatrixXcd stat =
        gh.wrt_q_dl[i] - gg.wrt_q_dl[i] - duals.mu * id + duals.z_dual[i];
    const double scale = 1.0 + gh.wrt_q_dl[i].norm() + gg.wrt_q_dl[i].norm() +
                         duals.mu * std::sqrt(n) + duals.z_dual[i].norm();
    res.stationarity_q = std::max(res.stationarity_q, stat.norm() / scale);
    const Eigen::MatrixXcd stat_sur =
        gh.wrt_q_dl[i] - gg_exp.wrt_q_dl[i] - duals.mu * id + duals.z_dual[i];
    res.stationarity_q_surrogate =
        std::max(res.stationarity_q_surrogate, stat_sur.norm() / scale);
    const double cs = std::abs((design.q_dl[i] * duals.z_dual[i]).trace().real());
    res.comp_slack_psd = std::max(
        res.comp_slack_psd,
        cs / (1.0 + design.q_dl[i].norm() * duals.z_dual[i].norm()));
  }
  for (int j = 0; j < design.k_ul(); ++j) {
    const double stat = gh.wrt_q_ul[j] - gg.wrt_q_ul[j] + duals.lambda_lo[j] -
                        duals.lambda_hi[j];
    const double scale = 1.0 + std::abs(gh.wrt_q_ul[j]) +
                         std::abs(gg.wrt_q_ul[j]) + duals.lambda_lo[j] +
                         duals.lambda_hi[j];
    res.stationarity_q_ul = std::max(res.stationarity_q_ul, std::abs(stat) / scale);
    const double stat_sur = gh.wrt_q_ul[j] - gg_exp.wrt_q_ul[j] +
                            duals.lambda_lo[j] - duals.lambda_hi[j];
    res.stationarity_q_ul_surrogate =
        std::max(res.stationarity_q_ul_surrogate, std::abs(stat_sur) / scale);
    const double cs_lo = std::abs(duals.lambda_lo[j] * design.q_ul[j]);
    const double cs_hi = std::abs(duals.lambda_hi[j] * (design.q_ul[j] - q_bar[j]));
    res.comp_slack_box =
        std::max(res.comp_slack_box,
                 std::max(cs_lo, cs_hi) / (1.0 + duals.lambda_lo[j] * q_bar[j] +
                                           duals.lambda_hi[j] * q_bar[j]));
  }
  if (design.k_dl() > 0) {
    const double cs = std::abs(duals.mu * (design.dl_power() - p_bs));
    res.comp_slack_budget = cs / (1.0 + duals.mu * p_bs);
  }
  res.max_scaled = std::max({res.stationarity_q, res.stationarity_q_ul,
                             res.comp_slack_box, res.comp_slack_psd,
                             res.comp_slack_budget});
  return res;
}

namespace {

// Shared outer loop. `step` runs one subproblem from the current state and
// returns its result; `carry` moves solver slacks into the next expansion.
Solution run_sca(const ScenarioConfig& cfg, const ChannelSet& ch, Rng& rng,
                 bool use_spca) {
  Solution sol;
  const double t_start = now_seconds();
  const Eigen::VectorXd q_bar = cfg.q_bar_vector();

  for (int restart = 0; restart <= cfg.algo.max_restarts; ++restart) {
    InitState st = initialize(cfg, ch, rng);
    Design exp_design = st.design;
    Design final_expansion = st.design;  // expansion of the last solved subproblem
    Eigen::VectorXd x = st.x0;
    Eigen::VectorXd psi = st.psi0;
    std::vector<double> u;
    IterationTrace trace;
    SubproblemResult last;
    bool failed = false;

    while (!stopping_rule(u, cfg.algo.stop_epsilon, cfg.algo.stop_window,
                          cfg.algo.max_iterations)) {
      const double t0 = now_seconds();
      SubproblemResult step;
      if (use_spca) {
        const SpcaSubproblem sub =
            SpcaSubproblem::build(ch, exp_design, x, psi, cfg.p_bs, q_bar);
        step = solve_spca(sub, cfg.solver);
      } else {
        const MaxdetSubproblem sub =
            MaxdetSubproblem::build(ch, exp_design, cfg.p_bs, q_bar);
        step = solve_maxdet(sub, cfg.solver);
      }
      const double dt = now_seconds() - t0;
      if (step.status != SubStatus::optimal && step.status != SubStatus::max_iter) {
        failed = true;
        break;
      }
      // An uncertified solve may only continue the trace if it kept the
      // ascent property; anything else counts as a subproblem failure.
      if (step.status == SubStatus::max_iter && !u.empty() &&
          step.objective < u.back() - 1e-12) {
        failed = true;
        break;
      }
      u.push_back(step.objective);
      IterationRecord rec;
      rec.iter = static_cast<int>(u.size());
      rec.surrogate = step.objective;
      rec.true_se_bits = rate_breakdown(ch, step.design).total_bits();
      rec.seconds = dt;
      rec.status = step.status;
      rec.newton_iters = step.newton_iters;
      trace.push_back(rec);

      final_expansion = exp_design;
      exp_design = step.design;
      if (use_spca) {
        x = step.x_ul;
        for (int i = 0; i < cfg.k_dl; ++i) psi[i] = step.t_dl[i] / step.beta_dl[i];
      }
      last = std::move(step);
    }

    if (failed || trace.empty()) {
      ++sol.restarts;
      continue;
    }
    sol.design = exp_design;
    sol.trace = std::move(trace);
    sol.iterations = static_cast<int>(sol.trace.size());
    sol.final_status = last.status;
    sol.relaxed_rates = rate_breakdown(ch, sol.design);
    sol.kkt = kkt_residual(sol.design, last, ch, final_expansion, cfg.p_bs, q_bar);
    for (const auto& q : sol.design.q_dl)
      sol.rank.push_back(check_rank1(q, cfg.algo.rank1_tol));
    const ExtractionResult ext =
        randomize_rank1(sol.design, ch, cfg.algo.randomization_samples, rng);
    sol.beamformers = ext.beamformers;
    sol.extracted_rates = ext.rates;
    sol.seconds = now_seconds() - t_start;
    return sol;
  }
  sol.final_status = SubStatus::numerical_failure;
  sol.seconds = now_seconds() - t_start;
  return sol;
}

}  // namespace

Solution run_iterative_maxdet(const ScenarioConfig& cfg, const ChannelSet& ch,
                              Rng& rng) {
  return run_sca(cfg, ch, rng, false);
}

Solution run_iterative_spca(const ScenarioConfig& cfg, const ChannelSet& ch,
                            Rng& rng) {
  return run_sca(cfg, ch, rng, true);
}

}  // namespace fdbeam
