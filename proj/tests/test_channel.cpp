#include <doctest.h>

#include <cmath>

#include "fdbeam/channel.hpp"
#include "fdbeam/units.hpp"
#include "helpers.hpp"

using namespace fdbeam;

TEST_SUITE_BEGIN("channel");

TEST_CASE("LOS path loss") {
  CHECK(path_loss_los_db(0.1) == doctest::Approx(82.9).epsilon(1e-12));
  CHECK(path_loss_los_db(1.0) == doctest::Approx(103.8).epsilon(1e-12));
  // direct high-precision evaluation of the model at 50 m
  CHECK(path_loss_los_db(0.05) ==
        doctest::Approx(103.8 + 20.9 * std::log10(0.05)).epsilon(1e-14));
  CHECK(path_loss_los_db(0.05) == doctest::Approx(76.6084730906).epsilon(1e-9));
  CHECK_THROWS_AS(path_loss_los_db(0.0), std::domain_error);
  CHECK_THROWS_AS(path_loss_los_db(-1.0), std::domain_error);
}

TEST_CASE("NLOS path loss") {
  CHECK(path_loss_nlos_db(0.1) == doctest::Approx(107.9).epsilon(1e-12));
  CHECK(path_loss_nlos_db(1.0) == doctest::Approx(145.4).epsilon(1e-12));
  // evaluation at the 64.82 m crossover distance
  CHECK(path_loss_nlos_db(0.06482) ==
        doctest::Approx(145.4 + 37.5 * std::log10(0.06482)).epsilon(1e-14));
  CHECK(std::abs(path_loss_nlos_db(0.06482) - 100.85) < 0.02);
  CHECK_THROWS_AS(path_loss_nlos_db(0.0), std::domain_error);
}

TEST_CASE("path loss monotone in distance") {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const double d1 = rng.uniform(0.001, 1.0);
    const double d2 = d1 * rng.uniform(1.0001, 3.0);
    CHECK(path_loss_los_db(d2) > path_loss_los_db(d1));
    CHECK(path_loss_nlos_db(d2) > path_loss_nlos_db(d1));
  }
}

TEST_CASE("noise power") {
  CHECK(noise_power(10e6, 9.0).dbm == doctest::Approx(-95.0).epsilon(1e-12));
  CHECK(noise_power(10e6, 5.0).dbm == doctest::Approx(-99.0).epsilon(1e-12));
  CHECK(noise_power(1.0, 0.0).dbm == doctest::Approx(-174.0).epsilon(1e-12));
  CHECK(noise_power(10e6, 9.0).watts ==
        doctest::Approx(dbm_to_watts(-95.0)).epsilon(1e-12));
}

TEST_CASE("dB round trips are identity") {
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double db = rng.uniform(-180.0, 60.0);
    CHECK(linear_to_db(db_to_linear(db)) == doctest::Approx(db).epsilon(1e-12));
    const double w = db_to_linear(rng.uniform(-150.0, 30.0));
    CHECK(db_to_linear(linear_to_db(w)) == doctest::Approx(w).epsilon(1e-12));
    CHECK(dbm_to_watts(watts_to_dbm(w)) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("topology: containment, determinism, disk moment") {
  ScenarioConfig cfg = test::iid_config(4, 2, 3, 2);
  cfg.channel_mode = ChannelMode::realistic;
  cfg.cell_radius_km = 0.1;

  Rng rng_a(42), rng_b(42);
  const Topology a = draw_topology(cfg, rng_a);
  const Topology b = draw_topology(cfg, rng_b);
  for (int i = 0; i < cfg.k_dl; ++i) {
    CHECK(a.dl_positions[i].norm() <= cfg.cell_radius_km);
    CHECK(a.dl_positions[i] == b.dl_positions[i]);
  }
  for (int j = 0; j < cfg.k_ul; ++j) {
    CHECK(a.ul_positions[j].norm() <= cfg.cell_radius_km);
    CHECK(a.ul_positions[j] == b.ul_positions[j]);
  }

  // area-uniform disk: E[rho^2] = r^2 / 2
  cfg.k_dl = 1;
  cfg.k_ul = 0;
  Rng rng(7);
  double sum_sq = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k)
    sum_sq += draw_topology(cfg, rng).dl_positions[0].squaredNorm();
  const double expected = cfg.cell_radius_km * cfg.cell_radius_km / 2.0;
  CHECK(sum_sq / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("SI channel moments and degenerate case") {
  ScenarioConfig cfg = test::iid_config(4, 2, 1, 1);
  SUBCASE("sigma_si2 = 0 gives exactly zero") {
    cfg.sigma_si2 = 0.0;
    Rng rng(5);
    const ChannelSet ch = draw_iid_channels(cfg, rng);
    CHECK(ch.h_si.norm() == 0.0);
  }
  SUBCASE("second moment matches the Rician model") {
    cfg.sigma_si2 = 1e-10;
    cfg.rician_k = 1.0;
    Rng rng(6);
    double sum = 0.0;
    const int n = 10000;
    for (int k = 0; k < n; ++k)
      sum += draw_iid_channels(cfg, rng).h_si.squaredNorm();
    const double expected = cfg.sigma_si2 * cfg.n_tx * cfg.n_rx;
    CHECK(sum / n == doctest::Approx(expected).epsilon(0.02));
  }
}

TEST_CASE("iid fading has unit variance entries") {
  ScenarioConfig cfg = test::iid_config(2, 2, 1, 0);
  Rng rng(8);
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const ChannelSet ch = draw_iid_channels(cfg, rng);
    sum += std::norm(ch.h_dl[0][0]);
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("realistic draw: dimensions, large-scale factors, determinism") {
  ScenarioConfig cfg = test::iid_config(4, 2, 2, 3);
  cfg.channel_mode = ChannelMode::realistic;
  Rng topo_rng(9);
  const Topology topo = draw_topology(cfg, topo_rng);
  Rng rng_a(10), rng_b(10);
  const ChannelSet a = draw_channels(cfg, topo, rng_a);
  const ChannelSet b = draw_channels(cfg, topo, rng_b);
  CHECK(a.k_dl() == 2);
  CHECK(a.k_ul() == 3);
  CHECK(a.h_dl[0].size() == 4);
  CHECK(a.h_ul[0].size() == 2);
  CHECK(a.g_cci.rows() == 3);
  CHECK(a.g_cci.cols() == 2);
  CHECK(a.h_si.rows() == 2);
  CHECK(a.h_si.cols() == 4);
  CHECK((a.h_dl[1] - b.h_dl[1]).norm() == 0.0);
  CHECK((a.g_cci - b.g_cci).norm() == 0.0);
  for (int i = 0; i < cfg.k_dl; ++i) {
    const double d = std::max(topo.dl_positions[i].norm(), 0.001);
    CHECK(a.kappa_dl[i] ==
          doctest::Approx(db_to_linear(-path_loss_los_db(d))).epsilon(1e-12));
  }
  CHECK(a.sigma_n2_dl == doctest::Approx(dbm_to_watts(-95.0)).epsilon(1e-12));
  CHECK(a.sigma_n2_bs == doctest::Approx(dbm_to_watts(-99.0)).epsilon(1e-12));
}

TEST_SUITE_END();
