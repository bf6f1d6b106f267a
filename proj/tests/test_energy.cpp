#include <doctest.h>

#include <cmath>
#include <random>

#include "kdvlab/energy.hpp"
#include "kdvlab/soliton.hpp"
#include "test_support.hpp"

using namespace kdvlab;
using kdvlab::testing::relative_error;

namespace {

double multisoliton_energy(int n, const std::vector<double>& betas) {
  double sum = 0.0;
  for (double b : betas) sum += std::pow(b, 2 * n + 1);
  return ((n % 2 == 1) ? 1.0 : -1.0) * std::pow(2.0, 2 * n + 1) / (2 * n + 1) * sum;
}

}  // namespace

TEST_CASE("sigma recursion, first terms by hand") {
  CHECK(sigma_density(1) == DensityPolynomial::u(0));
  CHECK(sigma_density(2) == DensityPolynomial::monomial(Rational(-1), {1}));
  DensityPolynomial s3 = DensityPolynomial::u(2);
  s3.add_term(Rational(-1), {0, 0});
  CHECK(sigma_density(3) == s3);
  CHECK_THROWS_AS(sigma_density(0), std::invalid_argument);
}

TEST_CASE("canonical densities reproduce the classical functionals exactly") {
  DensityPolynomial e1;
  e1.add_term(Rational(1, 2), {0, 0});
  CHECK(reduce_canonical(energy_density(1), 1) == e1);

  DensityPolynomial e2;
  e2.add_term(Rational(1, 2), {1, 1});
  e2.add_term(Rational(1), {0, 0, 0});
  CHECK(reduce_canonical(energy_density(2), 2) == e2);

  DensityPolynomial e3;
  e3.add_term(Rational(1, 2), {2, 2});
  e3.add_term(Rational(5), {0, 1, 1});
  e3.add_term(Rational(5, 2), {0, 0, 0, 0});
  CHECK(reduce_canonical(energy_density(3), 3) == e3);
  CHECK(e3.to_string() == "1/2 u''^2 + 5 u u'^2 + 5/2 u^4");
}

TEST_CASE("canonical structure holds for every supported index") {
  for (int n = 1; n <= kMaxEnergyIndex; ++n) {
    const auto& p = canonical_energy_density(n);
    CHECK(is_canonical_energy(p, n));
    CHECK(p.coefficient({n - 1, n - 1}) == Rational(1, 2));
    for (const auto& [orders, coeff] : p.terms()) {
      const int d = static_cast<int>(orders.size());
      int sum = 0;
      for (int a : orders) sum += a;
      CHECK(sum == 2 * n + 2 - 2 * d);
    }
  }
  CHECK_THROWS_AS(energy_density(7), std::invalid_argument);
  CHECK_THROWS_AS(energy_density(0), std::invalid_argument);
}

TEST_CASE("energies of the zero function and of solitons") {
  const SpatialGrid grid;
  for (int n = 1; n <= 4; ++n) CHECK(eval_energy(n, GridFunction(grid)) == 0.0);

  const auto one = eval_multisoliton(SolitonConfig({1.0}, {0.0}), grid);
  CHECK(relative_error(eval_energy(1, one), 8.0 / 3.0) < 1e-8);
  CHECK(relative_error(eval_energy(2, one), -32.0 / 5.0) < 1e-8);
  CHECK(relative_error(eval_energy(3, one), 128.0 / 7.0) < 1e-8);

  const auto two = eval_multisoliton(SolitonConfig({2.0, 1.0}, {0.0, 0.0}), grid);
  CHECK(relative_error(eval_energy(2, two), -211.2) < 1e-8);
  for (int n = 1; n <= 4; ++n) CHECK(relative_error(eval_energy(n, two), multisoliton_energy(n, {2.0, 1.0})) < 1e-8);
}

TEST_CASE("unreduced density integrates to the canonical value") {
  const SpatialGrid grid(40.0, 1024);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = kdvlab::testing::random_decaying(grid, rng, 0.8);
    for (int n = 1; n <= 3; ++n) {
      const double raw = integrate(eval_density(energy_density(n), f));
      const double canonical = eval_energy(n, f);
      CHECK(std::abs(raw - canonical) <= 1e-9 * std::max(1.0, std::abs(canonical)));
    }
  }
}

TEST_CASE("even sigma densities are exact derivatives") {
  const SpatialGrid grid(40.0, 1024);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = kdvlab::testing::random_decaying(grid, rng, 0.8);
    for (int m : {2, 4, 6}) CHECK(std::abs(integrate(eval_density(sigma_density(m), f))) < 1e-9);
  }
}

TEST_CASE("variational derivative by hand") {
  DensityPolynomial half_square;
  half_square.add_term(Rational(1, 2), {0, 0});
  CHECK(variational_derivative(half_square) == DensityPolynomial::u(0));

  DensityPolynomial e2;
  e2.add_term(Rational(1, 2), {1, 1});
  e2.add_term(Rational(1), {0, 0, 0});
  DensityPolynomial expected;
  expected.add_term(Rational(-1), {2});
  expected.add_term(Rational(3), {0, 0});
  CHECK(variational_derivative(e2) == expected);

  CHECK(variational_derivative(DensityPolynomial::u(1)).is_zero());
  // Unreduced and canonical densities share a gradient.
  for (int n = 1; n <= 4; ++n)
    CHECK(variational_derivative(energy_density(n)) == variational_derivative(canonical_energy_density(n)));
}

TEST_CASE("gradient matches central differences with quadratic error decay") {
  const SpatialGrid grid(40.0, 1024);
  std::mt19937_64 rng(21);
  const auto f = kdvlab::testing::random_decaying(grid, rng, 0.6);
  const auto phi = kdvlab::testing::random_decaying(grid, rng, 1.0);
  for (int n = 1; n <= 4; ++n) {
    const double exact = integrate(product(energy_gradient(n, f), phi));
    double errors[2];
    const double steps[2] = {1e-2, 5e-3};
    for (int i = 0; i < 2; ++i) {
      const double eps = steps[i];
      const double fd = (eval_energy(n, f + eps * phi) - eval_energy(n, f - eps * phi)) / (2 * eps);
      errors[i] = std::abs(fd - exact);
    }
    CHECK(errors[0] < 1e-3 * std::max(1.0, std::abs(exact)));
    // halving eps quarters the error (allow slack for rounding)
    CHECK(errors[1] < 0.3 * errors[0] + 1e-10);
  }
}

TEST_CASE("Euler-Lagrange residuals") {
  const SpatialGrid grid;
  const auto one = eval_multisoliton(SolitonConfig({1.0}, {0.0}), grid);
  const std::vector<double> lambda{-4.0};
  const auto report = euler_lagrange_residual(one, 1, lambda);
  CHECK(report.residual_norm < 1e-6 * report.gradient_norm);

  const std::vector<double> zeros{0.0, 0.0};
  CHECK(euler_lagrange_residual(GridFunction(grid), 2, zeros).residual_norm == 0.0);
  CHECK_THROWS_AS(euler_lagrange_residual(one, 2, lambda), std::invalid_argument);
}
