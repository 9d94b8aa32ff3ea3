#include <doctest.h>

#include <cmath>

#include "fdbeam/baselines.hpp"
#include "helpers.hpp"

using namespace fdbeam;
using test::make_channels;

namespace {

Eigen::VectorXcd cvec(std::initializer_list<std::complex<double>> v) {
  Eigen::VectorXcd out(static_cast<int>(v.size()));
  int i = 0;
  for (auto x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("baselines");

TEST_CASE("half-duplex accounting") {
  const HalfDuplexResult r = half_duplex_total(4.0, 2.0);
  CHECK(r.dl_halved == doctest::Approx(2.0));
  CHECK(r.ul_halved == doctest::Approx(1.0));
  CHECK(r.total == doctest::Approx(3.0));
  CHECK(half_duplex_total(0.0, 0.0).total == 0.0);
  // linear under scaling
  const HalfDuplexResult s = half_duplex_total(8.0, 4.0);
  CHECK(s.total == doctest::Approx(2.0 * r.total));
}

TEST_CASE("half-duplex channel augmentation") {
  ScenarioConfig cfg = test::iid_config(4, 2, 2, 3);
  cfg.channel_mode = ChannelMode::realistic;
  Rng topo_rng(1);
  const Topology topo = draw_topology(cfg, topo_rng);
  Rng ch_rng(2);
  const ChannelSet fd = draw_channels(cfg, topo, ch_rng);
  Rng hd_rng_a(3), hd_rng_b(3);
  const ChannelSet hd_a = half_duplex_channels(fd, cfg, hd_rng_a);
  const ChannelSet hd_b = half_duplex_channels(fd, cfg, hd_rng_b);
  CHECK(hd_a.h_dl[0].size() == 6);
  CHECK(hd_a.h_ul[0].size() == 6);
  CHECK(hd_a.h_si.norm() == 0.0);
  CHECK(hd_a.g_cci.norm() == 0.0);
  // the original coefficients are kept, the extra ones share the path loss
  CHECK((hd_a.h_dl[1].head(4) - fd.h_dl[1]).norm() == 0.0);
  CHECK((hd_a.h_ul[2].head(2) - fd.h_ul[2]).norm() == 0.0);
  CHECK(hd_a.kappa_dl == fd.kappa_dl);
  CHECK((hd_a.h_dl[0] - hd_b.h_dl[0]).norm() == 0.0);  // deterministic
}

TEST_CASE("uplink water-filling closed forms and grid oracle") {
  SUBCASE("single user transmits at the cap") {
    auto ch = make_channels({}, {cvec({1.0, 0.5})}, Eigen::MatrixXcd::Zero(1, 0),
                            Eigen::MatrixXcd::Zero(2, 2));
    Eigen::VectorXd q_bar(1);
    q_bar << 3.0;
    const IwfResult r = uplink_iwf(ch, q_bar);
    CHECK(r.powers[0] == doctest::Approx(3.0));
    CHECK(r.se_bits == doctest::Approx(std::log2(1.0 + 3.0 * 1.25)).epsilon(1e-12));
  }
  SUBCASE("symmetric users get equal powers") {
    auto ch = make_channels({}, {cvec({1.0, 1.0}), cvec({1.0, 1.0})},
                            Eigen::MatrixXcd::Zero(2, 0),
                            Eigen::MatrixXcd::Zero(2, 2));
    Eigen::VectorXd q_bar(2);
    q_bar << 2.0, 2.0;
    const IwfResult r = uplink_iwf(ch, q_bar);
    CHECK(r.powers[0] == doctest::Approx(r.powers[1]).epsilon(1e-12));
  }
  SUBCASE("two-user sum rate matches a grid search") {
    ScenarioConfig cfg = test::iid_config(3, 3, 0, 2);
    Rng rng(4);
    auto ch = draw_iid_channels(cfg, rng);
    Eigen::VectorXd q_bar(2);
    q_bar << 5.0, 2.5;
    const IwfResult r = uplink_iwf(ch, q_bar);
    double best = 0.0;
    const int n = 100;  // 10^4 grid points
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) {
        Design d = Design::zero(0, 3, 2);
        d.q_ul << q_bar[0] * a / n, q_bar[1] * b / n;
        Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(3, 3);
        for (int j = 0; j < 2; ++j)
          cov += d.q_ul[j] * ch.h_ul[j] * ch.h_ul[j].adjoint();
        best = std::max(best, std::log2(std::abs(cov.determinant())));
      }
    CHECK(std::abs(r.se_bits - best) <= 1e-4);
    CHECK(r.se_bits >= best - 1e-12);  // grid cannot beat the cap solution
  }
}

TEST_CASE("downlink-only SEMax closed forms") {
  SUBCASE("single user is matched filtering") {
    ScenarioConfig cfg = test::iid_config(2, 1, 1, 0, 10.0, 1.0, 0.0);
    auto ch = make_channels({cvec({1.0, 0.5})}, {}, Eigen::MatrixXcd::Zero(0, 1),
                            Eigen::MatrixXcd::Zero(2, 2));
    Rng rng(5);
    const Solution sol = downlink_semax_hd(cfg, ch, rng);
    REQUIRE(sol.final_status == SubStatus::optimal);
    const double expected = std::log2(1.0 + 10.0 * 1.25);
    CHECK(sol.extracted_rates.dl_total_bits == doctest::Approx(expected).epsilon(1e-5));
  }
  SUBCASE("orthogonal equal-gain users split the power evenly") {
    ScenarioConfig cfg = test::iid_config(2, 1, 2, 0, 4.0, 1.0, 0.0);
    auto ch = make_channels({cvec({1.0, 0.0}), cvec({0.0, 1.0})}, {},
                            Eigen::MatrixXcd::Zero(0, 2),
                            Eigen::MatrixXcd::Zero(2, 2));
    Rng rng(6);
    const Solution sol = downlink_semax_hd(cfg, ch, rng);
    REQUIRE(sol.final_status == SubStatus::optimal);
    const double p0 = sol.design.q_dl[0].real().trace();
    const double p1 = sol.design.q_dl[1].real().trace();
    CHECK(p0 == doctest::Approx(p1).epsilon(0.01));
    CHECK(sol.extracted_rates.dl_total_bits ==
          doctest::Approx(2.0 * std::log2(3.0)).epsilon(1e-3));
  }
  SUBCASE("vanishing power gives zero SE") {
    ScenarioConfig cfg = test::iid_config(2, 1, 1, 0, 1e-9, 1.0, 0.0);
    auto ch = make_channels({cvec({1.0, 0.0})}, {}, Eigen::MatrixXcd::Zero(0, 1),
                            Eigen::MatrixXcd::Zero(2, 2));
    Rng rng(7);
    const Solution sol = downlink_semax_hd(cfg, ch, rng);
    REQUIRE(sol.final_status == SubStatus::optimal);
    CHECK(sol.extracted_rates.dl_total_bits <= 1e-8);
  }
}

TEST_CASE("downlink-only full-duplex run reduces to the baseline") {
  // K_U = 0 and no SI: the full-duplex machinery and the dedicated baseline
  // wrapper must produce the same result from the same seed.
  ScenarioConfig cfg = test::iid_config(3, 2, 2, 0, 10.0, 1.0, 0.0);
  Rng ch_rng(8);
  ChannelSet ch = draw_iid_channels(cfg, ch_rng);
  Rng rng_a(9);
  const Solution direct = run_iterative_spca(cfg, ch, rng_a);
  ScenarioConfig hd_cfg = cfg;
  hd_cfg.n_tx = 2;  // wrapper re-derives dimensions from the channel set
  hd_cfg.n_rx = 1;
  Rng rng_b(9);
  const Solution wrapped = downlink_semax_hd(hd_cfg, ch, rng_b);
  REQUIRE(direct.final_status == SubStatus::optimal);
  REQUIRE(wrapped.final_status == SubStatus::optimal);
  CHECK(direct.relaxed_rates.total_bits() ==
        doctest::Approx(wrapped.relaxed_rates.total_bits()).epsilon(1e-4));
  CHECK(direct.extracted_rates.total_bits() ==
        doctest::Approx(wrapped.extracted_rates.total_bits()).epsilon(1e-4));
}

TEST_CASE("iwf sweeps are label-invariant") {
  ScenarioConfig cfg = test::iid_config(2, 2, 0, 3);
  Rng rng(10);
  auto ch = draw_iid_channels(cfg, rng);
  Eigen::VectorXd q_bar(3);
  q_bar << 1.0, 2.0, 3.0;
  const IwfResult r = uplink_iwf(ch, q_bar);
  // permute users 0 and 2
  ChannelSet perm = ch;
  std::swap(perm.h_ul[0], perm.h_ul[2]);
  Eigen::VectorXd q_perm(3);
  q_perm << q_bar[2], q_bar[1], q_bar[0];
  const IwfResult rp = uplink_iwf(perm, q_perm);
  CHECK(r.se_bits == doctest::Approx(rp.se_bits).epsilon(1e-12));
}

TEST_SUITE_END();
