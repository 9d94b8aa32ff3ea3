#include <doctest.h>

#include <cmath>

#include "fdbeam/rate.hpp"
#include "fdbeam/units.hpp"
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

TEST_SUITE_BEGIN("rate");

TEST_CASE("downlink SINR closed forms") {
  SUBCASE("single-user MRT") {
    const double p = 7.0;
    auto ch = make_channels({cvec({1.0, 0.0})}, {}, Eigen::MatrixXcd::Zero(0, 1),
                            Eigen::MatrixXcd::Zero(1, 2));
    Design d = Design::zero(1, 2, 0);
    d.q_dl[0](0, 0) = p;
    CHECK(downlink_sinr(0, ch, d) == doctest::Approx(p).epsilon(1e-12));
    CHECK(downlink_se(ch, d) == doctest::Approx(std::log2(1.0 + p)).epsilon(1e-12));
  }
  SUBCASE("scalar with CCI") {
    Eigen::MatrixXcd g(1, 1);
    g(0, 0) = 1.0;
    auto ch = make_channels({cvec({1.0})}, {cvec({1.0})}, g,
                            Eigen::MatrixXcd::Zero(1, 1));
    Design d = Design::zero(1, 1, 1);
    d.q_dl[0](0, 0) = 4.0;
    d.q_ul[0] = 1.0;
    CHECK(downlink_sinr(0, ch, d) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("two users, MUI") {
    auto ch = make_channels({cvec({1.0, 1.0}), cvec({1.0, -1.0})}, {},
                            Eigen::MatrixXcd::Zero(0, 2),
                            Eigen::MatrixXcd::Zero(1, 2));
    Design d = Design::zero(2, 2, 0);
    d.q_dl[0](0, 0) = 1.0;
    d.q_dl[1](1, 1) = 1.0;
    CHECK(downlink_sinr(0, ch, d) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("index out of range") {
    auto ch = make_channels({cvec({1.0})}, {}, Eigen::MatrixXcd::Zero(0, 1),
                            Eigen::MatrixXcd::Zero(1, 1));
    const Design d = Design::zero(1, 1, 0);
    CHECK_THROWS_AS(downlink_sinr(1, ch, d), std::out_of_range);
  }
}

TEST_CASE("uplink SINR closed forms") {
  SUBCASE("single user, no SI") {
    const double p = 5.0;
    auto ch = make_channels({}, {cvec({1.0})}, Eigen::MatrixXcd::Zero(1, 0),
                            Eigen::MatrixXcd::Zero(1, 1));
    Design d = Design::zero(0, 1, 1);
    d.q_ul[0] = p;
    CHECK(uplink_sinr(0, ch, d) == doctest::Approx(p).epsilon(1e-12));
  }
  SUBCASE("two users, SIC order") {
    auto ch = make_channels({}, {cvec({1.0}), cvec({1.0})},
                            Eigen::MatrixXcd::Zero(2, 0),
                            Eigen::MatrixXcd::Zero(1, 1));
    Design d = Design::zero(0, 1, 2);
    d.q_ul << 1.0, 1.0;
    CHECK(uplink_sinr(0, ch, d) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(uplink_sinr(1, ch, d) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(uplink_se_det(ch, d) == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
    CHECK(uplink_se(ch, d) == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
  }
  SUBCASE("self-interference strictly degrades the SINR") {
    ScenarioConfig cfg = test::iid_config(3, 2, 2, 2);
    Rng rng(21);
    ChannelSet ch = draw_iid_channels(cfg, rng);
    const Design d = test::random_design(cfg, rng);
    ChannelSet no_si = ch;
    no_si.h_si.setZero();
    for (int j = 0; j < cfg.k_ul; ++j)
      CHECK(uplink_sinr(j, ch, d) < uplink_sinr(j, no_si, d));
  }
}

TEST_CASE("rate-form identities on random instances") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    ScenarioConfig cfg = test::iid_config(2 + trial % 3, 2 + trial % 2,
                                          1 + trial % 3, 1 + trial % 2);
    cfg.sigma_si2 = 0.5;
    ChannelSet ch = draw_iid_channels(cfg, rng);
    const Design d = test::random_design(cfg, rng);
    const double dl_a = downlink_se(ch, d);
    const double dl_b = downlink_se_ratio_form(ch, d);
    CHECK(dl_a == doctest::Approx(dl_b).epsilon(1e-9));
    const double ul_a = uplink_se(ch, d);
    const double ul_b = uplink_se_det(ch, d);
    CHECK(ul_a == doctest::Approx(ul_b).epsilon(1e-9));
    // dc_h - dc_g == ln2 * (R_D + R_U)
    CHECK(dc_h(ch, d) - dc_g(ch, d) ==
          doctest::Approx(LN2 * (dl_a + ul_a)).epsilon(1e-9));
  }
}

TEST_CASE("zero design gives zero rates") {
  ScenarioConfig cfg = test::iid_config(3, 2, 2, 2);
  Rng rng(41);
  const ChannelSet ch = draw_iid_channels(cfg, rng);
  const Design d = Design::zero(2, 3, 2);
  CHECK(downlink_se(ch, d) == 0.0);
  CHECK(uplink_se_det(ch, d) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dc_h(ch, d) - dc_g(ch, d) == doctest::Approx(0.0).epsilon(1e-12));
  const RateBreakdown r = rate_breakdown(ch, d);
  CHECK(r.total_bits() == 0.0);
}

TEST_CASE("rate breakdown totals equal per-user sums") {
  ScenarioConfig cfg = test::iid_config(4, 3, 3, 2);
  Rng rng(43);
  const ChannelSet ch = draw_iid_channels(cfg, rng);
  const Design d = test::random_design(cfg, rng);
  const RateBreakdown r = rate_breakdown(ch, d);
  CHECK(r.dl_total_bits ==
        doctest::Approx(r.dl_rate_bits.sum()).epsilon(1e-12));
  CHECK(r.ul_total_bits ==
        doctest::Approx(r.ul_rate_bits.sum()).epsilon(1e-12));
  for (int i = 0; i < cfg.k_dl; ++i) CHECK(r.dl_sinr[i] >= 0.0);
  for (int j = 0; j < cfg.k_ul; ++j) CHECK(r.ul_sinr[j] >= 0.0);
}

TEST_CASE("dc_h and dc_g are concave along random segments") {
  Rng rng(51);
  ScenarioConfig cfg = test::iid_config(3, 2, 2, 2);
  cfg.sigma_si2 = 0.3;
  const ChannelSet ch = draw_iid_channels(cfg, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const Design a = test::random_design(cfg, rng);
    const Design b = test::random_design(cfg, rng);
    Design mid = a;
    for (int i = 0; i < cfg.k_dl; ++i) mid.q_dl[i] = 0.5 * (a.q_dl[i] + b.q_dl[i]);
    mid.q_ul = 0.5 * (a.q_ul + b.q_ul);
    CHECK(dc_h(ch, mid) >= 0.5 * (dc_h(ch, a) + dc_h(ch, b)) - 1e-10);
    CHECK(dc_g(ch, mid) >= 0.5 * (dc_g(ch, a) + dc_g(ch, b)) - 1e-10);
  }
}

TEST_CASE("affine majorization of dc_g") {
  Rng rng(61);
  ScenarioConfig cfg = test::iid_config(3, 2, 2, 2);
  cfg.sigma_si2 = 0.4;
  const ChannelSet ch = draw_iid_channels(cfg, rng);
  const Design exp = test::random_design(cfg, rng);

  SUBCASE("tight at the expansion point") {
    CHECK(dc_g_affine(ch, exp, exp) ==
          doctest::Approx(dc_g(ch, exp)).epsilon(1e-12));
  }
  SUBCASE("majorizes dc_g over the feasible set") {
    for (int trial = 0; trial < 1000; ++trial) {
      const Design p = test::random_design(cfg, rng);
      CHECK(dc_g_affine(ch, p, exp) >= dc_g(ch, p) - 1e-9);
    }
  }
  SUBCASE("slope matches central finite differences") {
    const Design dir = test::random_design(cfg, rng);  // random direction
    const double eps = 1e-6;
    Design plus = exp, minus = exp;
    for (int i = 0; i < cfg.k_dl; ++i) {
      plus.q_dl[i] += eps * dir.q_dl[i];
      minus.q_dl[i] -= eps * dir.q_dl[i];
    }
    plus.q_ul += eps * dir.q_ul;
    minus.q_ul -= eps * dir.q_ul;
    const double fd = (dc_g(ch, plus) - dc_g(ch, minus)) / (2.0 * eps);
    const double affine_slope =
        (dc_g_affine(ch, plus, exp) - dc_g_affine(ch, minus, exp)) / (2.0 * eps);
    CHECK(affine_slope == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("design feasibility checks") {
  ScenarioConfig cfg = test::iid_config(3, 2, 2, 2);
  Rng rng(71);
  Design d = test::random_design(cfg, rng);
  const Eigen::VectorXd q_bar = cfg.q_bar_vector();
  CHECK(design_feasible(d, cfg.p_bs, q_bar));
  d.q_ul[0] = cfg.q_bar * 1.5;
  CHECK(!design_feasible(d, cfg.p_bs, q_bar));
  d.q_ul[0] = 0.0;
  d.q_dl[0] = -0.1 * Eigen::MatrixXcd::Identity(3, 3);
  CHECK(!design_feasible(d, cfg.p_bs, q_bar));
}

TEST_SUITE_END();
