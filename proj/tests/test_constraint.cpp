#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kdvlab/constraint.hpp"
#include "test_support.hpp"

using namespace kdvlab;
using kdvlab::testing::relative_error;

namespace {

std::vector<double> random_betas(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> dist(0.2, 3.0);
  std::vector<double> b;
  while (static_cast<int>(b.size()) < count) {
    const double v = dist(rng);
    if (std::all_of(b.begin(), b.end(), [&](double w) { return std::abs(w - v) > 0.05; })) b.push_back(v);
  }
  std::sort(b.begin(), b.end(), std::greater<>());
  return b;
}

double C_at(const ConstraintVector& e) { return solve_betas(e).C; }

}  // namespace

TEST_CASE("forward map") {
  const auto one = constraints_of_betas(std::vector<double>{1.0}, 2);
  CHECK(one[0] == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(one[1] == doctest::Approx(-32.0 / 5.0).epsilon(1e-15));
  const auto two = constraints_of_betas(std::vector<double>{2.0, 1.0}, 2);
  CHECK(std::abs(two[0] - 24.0) < 1e-12);
  CHECK(std::abs(two[1] + 211.2) < 1e-12);
  const auto none = constraints_of_betas(std::vector<double>{}, 3);
  CHECK(none == ConstraintVector{0.0, 0.0, 0.0});
  const std::vector<BetaMultiplicity> doubled{{1.0, 2}};
  CHECK(constraints_of_betas(doubled, 1)[0] == doctest::Approx(16.0 / 3.0));
}

TEST_CASE("solve_betas examples") {
  const auto r = solve_betas({24.0, -211.2});
  REQUIRE(r.betas.size() == 2);
  CHECK(std::abs(r.betas[0].value - 2.0) < 1e-12);
  CHECK(std::abs(r.betas[1].value - 1.0) < 1e-12);
  CHECK(relative_error(r.C, 128.0 / 7.0 * 129.0) < 1e-9);
  CHECK(r.region == RegionLabel{Region::InteriorMnn, 2});
  CHECK(r.lambda[0] < 0.0);
  CHECK(r.lambda[1] < 0.0);

  const auto boundary = solve_betas({8.0 / 3.0, -32.0 / 5.0});
  REQUIRE(boundary.betas.size() == 1);
  CHECK(std::abs(boundary.betas[0].value - 1.0) < 1e-12);
  CHECK(boundary.region == RegionLabel{Region::BoundaryMnn, 1});
  CHECK(boundary.one_sided_gradient);

  const auto origin = solve_betas({0.0, 0.0});
  CHECK(origin.betas.empty());
  CHECK(origin.C == 0.0);
  CHECK(origin.region.tag == Region::Origin);

  CHECK_THROWS_AS(solve_betas({24.0, -100.0}), NotInMnn);
  CHECK_THROWS_AS(solve_betas({1.0, 1.0}), NotInMnn);
  CHECK_THROWS_AS(solve_betas({}), std::invalid_argument);
}

TEST_CASE("round trip on random configurations") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const auto betas = random_betas(rng, n);
    const auto e = constraints_of_betas(betas, n);
    const auto r = solve_betas(e);
    REQUIRE(static_cast<int>(r.betas.size()) == n);
    const auto back = constraints_of_betas(r.betas, n);
    for (int m = 0; m < n; ++m) CHECK(relative_error(back[m], e[m]) < 1e-9);
    for (int j = 0; j < n; ++j) CHECK(relative_error(r.betas[j].value, betas[j]) < 1e-8);
  }
}

TEST_CASE("random initializations reach the same parameters") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.05, 5.0);
  for (int n : {2, 3, 4}) {
    const auto betas = random_betas(rng, n);
    const auto e = constraints_of_betas(betas, n);
    for (int start = 0; start < 20; ++start) {
      std::vector<double> init(static_cast<std::size_t>(n));
      for (auto& v : init) v = dist(rng);
      std::sort(init.begin(), init.end(), std::greater<>());
      const auto r = solve_betas(e, init);
      for (int j = 0; j < n; ++j) CHECK(std::abs(r.betas[j].value - betas[j]) < 1e-8);
    }
  }
}

TEST_CASE("Vieta multipliers") {
  const auto one = solve_betas({8.0 / 3.0});
  CHECK(std::abs(one.lambda[0] + 4.0) < 1e-12);

  const auto two = solve_betas({24.0, -211.2});
  CHECK(std::abs(two.lambda[0] + 64.0) < 1e-9);
  CHECK(std::abs(two.lambda[1] + 20.0) < 1e-9);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto e = constraints_of_betas(random_betas(rng, n), n);
    const auto r = solve_betas(e);
    for (int j = 0; j < n; ++j) {
      CHECK(r.lambda[j] < 0.0);
      // fourth-order central difference
      const double h = 1e-6 * std::abs(e[j]);
      const auto at = [&](double offset) {
        auto moved = e;
        moved[j] += offset;
        return C_at(moved);
      };
      const double fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      INFO("trial ", trial, " j ", j);
      CHECK(relative_error(r.lambda[j], fd) < 1e-6);
    }
  }
}

TEST_CASE("C decreases in each constraint") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto e = constraints_of_betas(random_betas(rng, 2), 2);
    const double base = C_at(e);
    for (int j = 0; j < 2; ++j) {
      auto bumped = e;
      bumped[j] += 1e-3 * std::abs(e[j]);
      CHECK(C_at(bumped) < base);
    }
  }
}

TEST_CASE("downward closure") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> shrink(0.3, 0.95);
  for (int trial = 0; trial < 10; ++trial) {
    // Scaling all parameters down lowers E_1 and raises E_2 toward zero.
    const auto betas = random_betas(rng, 2);
    const auto e = constraints_of_betas(betas, 2);
    auto smaller = betas;
    for (auto& b : smaller) b *= shrink(rng);
    std::sort(smaller.begin(), smaller.end(), std::greater<>());
    const auto lower = constraints_of_betas(smaller, 2);
    REQUIRE(lower[0] <= e[0]);
    const auto r = solve_betas(lower);
    CHECK(r.total_degree() <= 2);
  }
}

TEST_CASE("n = 2 classification") {
  CHECK(std::abs(single_soliton_bound(24.0) - 249.22) < 0.01);
  CHECK(classify({24.0, -211.2}) == RegionLabel{Region::InteriorMnn, 2});
  CHECK(classify({24.0, -100.0}) == RegionLabel{Region::Gas, 4});
  CHECK(classify({1.0, 1.0}).tag == Region::PointMass);
  CHECK(classify({1.0, 0.0}).tag == Region::PointMass);
  CHECK(classify({0.0, 0.0}).tag == Region::Origin);
  CHECK(classify({-1.0, -1.0}).tag == Region::Infeasible);
  CHECK(classify({24.0, -300.0}).tag == Region::Infeasible);
  CHECK(classify({8.0 / 3.0, -32.0 / 5.0}) == RegionLabel{Region::BoundaryMnn, 1});
  CHECK(classify({1.0}).tag == Region::InteriorMnn);
  CHECK(RegionLabel{Region::Gas, 4}.to_string() == "Gas(4)");
}

TEST_CASE("solver-based classification agrees with the closed form") {
  for (const ConstraintVector& e : {ConstraintVector{24.0, -211.2}, ConstraintVector{24.0, -100.0},
                                    ConstraintVector{1.0, 1.0}, ConstraintVector{24.0, -300.0},
                                    ConstraintVector{5.0, -12.0}})
    CHECK_MESSAGE(classify_by_solver(e) == classify(e), e[0], " ", e[1], " ", classify_by_solver(e).to_string());
  CHECK(classify_by_solver({8.0 / 3.0, -32.0 / 5.0}) == RegionLabel{Region::BoundaryMnn, 1});
  // Beyond the search depth the degree is reported as a lower bound.
  const auto deep = classify_by_solver({5.0, -0.1}, 6);
  CHECK(deep.tag == Region::Gas);
  CHECK(deep.degree_is_lower_bound);
  CHECK(classify({5.0, -0.1}).degree > 6);
  // n = 3, from a known configuration
  CHECK(classify(constraints_of_betas(std::vector<double>{2.0, 1.2, 0.5}, 3)).tag == Region::InteriorMnn);
}

TEST_CASE("wiggle derivative") {
  const std::vector<double> a{1.0, 2.0};
  CHECK(std::abs(wiggle_direction(a, 1).d_next - 60.0) < 1e-12);
  CHECK(std::abs(wiggle_derivative_closed_form(a, 1) - 60.0) < 1e-12);
  const std::vector<double> b{3.0, 2.0, 1.0};
  CHECK(std::abs(wiggle_direction(b, 2).d_next - 168.0) < 1e-10);
  CHECK(wiggle_derivative_closed_form(b, 2) == 168.0);

  std::mt19937_64 rng(23);
  for (int n = 1; n <= 4; ++n) {
    auto betas = random_betas(rng, n + 1);
    std::shuffle(betas.begin(), betas.end(), rng);
    const auto w = wiggle_direction(betas, n);
    CHECK(relative_error(w.d_next, wiggle_derivative_closed_form(betas, n)) < 1e-10);

    // Move along (tangent, 1): the first n sums change at O(eps^2).
    const auto sums = [&](const std::vector<double>& x) {
      std::vector<double> out;
      for (int k = 1; k <= n + 1; ++k) {
        double s = 0.0;
        for (double v : x) s += std::pow(v, 2 * k + 1);
        out.push_back(s);
      }
      return out;
    };
    const auto base = sums(betas);
    double drift[2];
    const double steps[2] = {1e-5, 5e-6};
    for (int i = 0; i < 2; ++i) {
      auto moved = betas;
      for (int j = 0; j < n; ++j) moved[j] += steps[i] * w.tangent[j];
      moved[n] += steps[i];
      const auto after = sums(moved);
      drift[i] = 0.0;
      for (int k = 0; k < n; ++k) drift[i] = std::max(drift[i], std::abs(after[k] - base[k]) / base[k]);
      const double next_rate = (after[n] - base[n]) / steps[i];
      CHECK(std::abs(next_rate - w.d_next) < 1e-3 * std::max(1.0, std::abs(w.d_next)));
    }
    CHECK(drift[0] < 1e-7);
    CHECK(drift[1] < 0.3 * drift[0] + 1e-13);
  }
  CHECK_THROWS_AS(wiggle_direction(std::vector<double>{1.0, 1.0}, 1), std::invalid_argument);
}

TEST_CASE("wiggling in the gas direction lowers the next power sum") {
  std::vector<double> betas{2.0, 1.5, 1.0};
  const int n = 2;
  const auto power = [&](int p) {
    double s = 0.0;
    for (double v : betas) s += std::pow(v, p);
    return s;
  };
  const double s3 = power(3), s5 = power(5);
  double previous = power(7);
  for (int step = 0; step < 20; ++step) {
    const auto w = wiggle_direction(betas, n);
    betas = wiggle_step(betas, n, w.d_next > 0.0 ? -1e-2 : 1e-2);
    const double now = power(7);
    CHECK(now < previous);
    previous = now;
  }
  CHECK(std::abs(power(3) - s3) < 1e-8 * s3);
  CHECK(std::abs(power(5) - s5) < 1e-8 * s5);
}

TEST_CASE("relaxed minimization in the gas band") {
  const ConstraintVector e{24.0, -100.0};
  const auto r = relaxed_minimize(e, 4);
  CHECK(r.betas.size() <= 2);
  CHECK(r.total_degree() <= 4);
  const auto back = constraints_of_betas(r.betas, 2);
  CHECK(relative_error(back[0], e[0]) < 1e-9);
  CHECK(relative_error(back[1], e[1]) < 1e-9);
  CHECK(r.region.tag == Region::Gas);
  CHECK_THROWS_AS(relaxed_minimize(e, 3), NotInMnn);

  // Distinct configurations of degree 4 cannot beat the relaxed minimum.
  const std::vector<double> distinct{3.0, 2.0, 1.0, 0.5};
  const auto e2 = constraints_of_betas(distinct, 2);
  const auto relaxed = relaxed_minimize(e2, 4);
  double sum = 0.0;
  for (double b : distinct) sum += std::pow(b, 7);
  CHECK(relaxed.C <= energy_coefficient(3) * sum + 1e-9);

  const auto same = relaxed_minimize({24.0, -211.2}, 2);
  CHECK(same.betas == solve_betas({24.0, -211.2}).betas);
}

TEST_CASE("point-mass infimum") {
  const double rp = std::sqrt(std::numbers::pi);
  const auto p = point_mass_infimum(rp / 4.0, rp);
  CHECK(std::abs(p.value - 4.0 * rp) < 1e-12);
  CHECK(point_mass_infimum(1.0, 0.0).value == 0.0);
  const auto q = point_mass_infimum(1.0, 2.0);
  CHECK(q.value == 4.0);
  // Cauchy-Schwarz gamma_2 >= gamma_1^2 / gamma_0 with E_3 = (64/pi) gamma_2.
  CHECK(std::abs(64.0 / std::numbers::pi * q.gamma1 * q.gamma1 / q.gamma0 - q.value) < 1e-12);
  CHECK_THROWS_AS(point_mass_infimum(0.0, 1.0), std::invalid_argument);
}
