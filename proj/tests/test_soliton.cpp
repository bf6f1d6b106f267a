#include <doctest.h>

#include <cmath>
#include <random>

#include "kdvlab/energy.hpp"
#include "kdvlab/soliton.hpp"
#include "test_support.hpp"

using namespace kdvlab;
using kdvlab::testing::sup_distance;

namespace {

// log det A for a two-soliton, straight from the matrix entries, in long double.
long double log_det_two(const SolitonConfig& cfg, long double x) {
  const long double b1 = cfg.betas()[0], b2 = cfg.betas()[1];
  const long double c1 = cfg.shifts()[0], c2 = cfg.shifts()[1];
  const long double v1 = std::exp(-b1 * (x - c1)), v2 = std::exp(-b2 * (x - c2));
  const long double a11 = 1 + v1 * v1 / (2 * b1);
  const long double a22 = 1 + v2 * v2 / (2 * b2);
  const long double a12 = v1 * v2 / (b1 + b2);
  return std::log(a11 * a22 - a12 * a12);
}

}  // namespace

TEST_CASE("one-soliton matches the sech^2 profile") {
  const SpatialGrid grid;
  for (double beta : {0.5, 1.0, 2.0}) {
    for (double c : {-3.0, 0.0, 4.5}) {
      const SolitonConfig cfg({beta}, {c});
      const auto q = eval_multisoliton(cfg, grid);
      const double x0 = soliton_center(beta, c);
      const auto expected = GridFunction::sample(grid, [&](double x) { return sech2_soliton(beta, x0, x); });
      CHECK(sup_distance(q, expected) < 1e-10);
    }
  }
}

TEST_CASE("large amplitudes stay finite across the whole grid") {
  const SpatialGrid grid;
  const SolitonConfig cfg({6.0}, {1.0});
  const auto q = eval_multisoliton(cfg, grid);
  const double x0 = soliton_center(6.0, 1.0);
  const auto expected = GridFunction::sample(grid, [&](double x) { return sech2_soliton(6.0, x0, x); });
  CHECK(sup_distance(q, expected) < 1e-9);
  const SolitonConfig three({5.0, 3.0, 1.0}, {-20.0, 0.0, 20.0});
  for (double v : eval_multisoliton(three, grid).values()) CHECK(std::isfinite(v));
}

TEST_CASE("degree zero is the zero function") {
  const SpatialGrid grid;
  CHECK(eval_multisoliton(SolitonConfig{}, grid).max_abs() == 0.0);
}

TEST_CASE("two-soliton against finite differences of log det") {
  const SolitonConfig cfg({2.0, 1.0}, {-1.0, 1.5});
  const long double h = 1e-3L;
  for (double x : {-3.0, -1.0, 0.0, 0.7, 2.0, 5.0}) {
    const long double xl = x;
    const long double fd =
        (log_det_two(cfg, xl + h) - 2 * log_det_two(cfg, xl) + log_det_two(cfg, xl - h)) / (h * h);
    CHECK(std::abs(multisoliton_at(cfg, x) - static_cast<double>(-2 * fd)) < 1e-5);
  }
}

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(SolitonConfig({1.0, 2.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(SolitonConfig({1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(SolitonConfig({1.0, -0.5}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(SolitonConfig({1.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("parameter evolution") {
  const SolitonConfig one({1.0}, {0.0});
  CHECK(evolve_config(one, 0.0).shifts() == one.shifts());
  CHECK(evolve_config(one, 1.0).shifts()[0] == doctest::Approx(4.0));
  const auto two = evolve_config(SolitonConfig({2.0, 1.0}, {0.0, 0.0}), 0.5);
  CHECK(two.shifts()[0] == doctest::Approx(8.0));
  CHECK(two.shifts()[1] == doctest::Approx(2.0));
}

TEST_CASE("superposition") {
  const SpatialGrid grid;
  const SolitonConfig one({1.0}, {0.0});
  const std::vector<SolitonConfig> single{one};
  const std::vector<double> zero{0.0};
  CHECK(sup_distance(superpose(single, zero, grid), eval_multisoliton(one, grid)) == 0.0);

  CHECK(superpose(std::vector<SolitonConfig>{}, std::vector<double>{}, grid).max_abs() == 0.0);

  const std::vector<SolitonConfig> pair{one, one};
  const std::vector<double> offsets{-20.0, 20.0};
  const auto sum = superpose(pair, offsets, grid);
  const double n1 = sobolev_norm(eval_multisoliton(one.translated(-20.0), grid), 0);
  const double n2 = sobolev_norm(eval_multisoliton(one.translated(20.0), grid), 0);
  const double total = sobolev_norm(sum, 0);
  CHECK(std::abs(total * total - (n1 * n1 + n2 * n2)) < 1e-6);
}

TEST_CASE("energy of the (2,1) two-soliton") {
  const SpatialGrid grid;
  const auto q = eval_multisoliton(SolitonConfig({2.0, 1.0}, {0.0, 0.0}), grid);
  CHECK(std::abs(eval_energy(1, q) - 24.0) < 1e-8);
}

TEST_CASE("energies do not depend on the shifts") {
  const SpatialGrid grid;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shift(-4.0, 4.0);
  const std::vector<double> betas{1.6, 1.1, 0.7};
  std::vector<double> reference;
  for (int m = 1; m <= 4; ++m)
    reference.push_back(eval_energy(m, eval_multisoliton(SolitonConfig(betas, {0.0, 0.0, 0.0}), grid)));
  for (int trial = 0; trial < 10; ++trial) {
    const SolitonConfig cfg(betas, {shift(rng), shift(rng), shift(rng)});
    const auto q = eval_multisoliton(cfg, grid);
    for (int m = 1; m <= 4; ++m)
      CHECK(kdvlab::testing::relative_error(eval_energy(m, q), reference[m - 1]) < 1e-8);
  }
}

TEST_CASE("translation covariance") {
  const SpatialGrid grid;
  const SolitonConfig cfg({1.5, 0.8}, {-1.0, 2.0});
  const double s = 0.75;
  const auto moved = eval_multisoliton(cfg.translated(s), grid);
  const auto base = eval_multisoliton(cfg, grid);
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.points(); ++j) {
    const double x = grid.node(j);
    if (std::abs(x) > 30.0) continue;
    worst = std::max(worst, std::abs(moved[j] - multisoliton_at(cfg, x - s)));
  }
  CHECK(worst < 1e-10);
  CHECK(base.line_valid());
}

TEST_CASE("parallel and serial evaluation agree exactly") {
  const SpatialGrid grid;
  const SolitonConfig cfg({2.5, 1.2, 0.4}, {-3.0, 0.0, 6.0});
  CHECK(sup_distance(eval_multisoliton(cfg, grid), eval_multisoliton_serial(cfg, grid)) == 0.0);
}
