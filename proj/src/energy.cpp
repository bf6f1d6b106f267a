#include "kdvlab/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "kdvlab/errors.hpp"

namespace kdvlab {
namespace {

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

// sigma_m for m <= 2 * kMaxEnergyIndex + 1.
const DensityPolynomial& sigma_cached(int m) {
  static std::vector<DensityPolynomial> sigmas;
  std::lock_guard lock(cache_mutex());
  if (sigmas.empty()) sigmas.push_back(DensityPolynomial::u(0));
  while (static_cast<int>(sigmas.size()) < m) {
    const int k = static_cast<int>(sigmas.size());  // build sigma_{k+1}
    DensityPolynomial next = Rational(-1) * sigmas[k - 1].derivative();
    for (int j = 1; j <= k - 1; ++j) next -= sigmas[j - 1] * sigmas[k - j - 1];
    sigmas.push_back(std::move(next));
  }
  return sigmas[m - 1];
}

void require_energy_index(int n, const char* where) {
  if (n < 1 || n > kMaxEnergyIndex)
    throw std::invalid_argument(std::string(where) + ": energy index outside supported range 1..6");
}

bool monomial_canonical(const Orders& orders) {
  if (orders.empty()) return true;
  const int top = orders.back();
  if (top == 0) return true;
  return orders.size() >= 2 && orders[orders.size() - 2] == top;
}

// One integration-by-parts pass over the non-canonical terms.
DensityPolynomial reduction_pass(const DensityPolynomial& p) {
  DensityPolynomial out;
  for (const auto& [orders, coeff] : p.terms()) {
    if (monomial_canonical(orders)) {
      out.add_term(coeff, orders);
      continue;
    }
    const int top = orders.back();
    Orders rest(orders.begin(), orders.end() - 1);
    if (rest.empty()) continue;  // u^(a) with a >= 1 is exact
    if (rest.back() < top - 1) {
      // f u^(a) == -f' u^(a-1)
      const auto rest_derivative = DensityPolynomial::monomial(Rational(1), rest).derivative();
      out += Rational(-1) * coeff * rest_derivative * DensityPolynomial::u(top - 1);
    } else {
      // g (u^(a-1))^k u^(a) == -g' (u^(a-1))^(k+1) / (k+1)
      const auto first_top = std::find(rest.begin(), rest.end(), top - 1);
      const auto k = static_cast<std::int64_t>(rest.end() - first_top);
      Orders g(rest.begin(), first_top);
      if (g.empty()) continue;
      Orders power(static_cast<std::size_t>(k + 1), top - 1);
      out += Rational(-1, k + 1) * coeff * DensityPolynomial::monomial(Rational(1), g).derivative() *
             DensityPolynomial::monomial(Rational(1), power);
    }
  }
  return out;
}

}  // namespace

DensityPolynomial sigma_density(int m) {
  if (m < 1) throw std::invalid_argument("sigma_density: index must be positive");
  if (m > 2 * kMaxEnergyIndex + 1) throw std::invalid_argument("sigma_density: index beyond supported range");
  return sigma_cached(m);
}

DensityPolynomial energy_density(int n) {
  require_energy_index(n, "energy_density");
  const Rational sign = (n % 2 == 0) ? Rational(1) : Rational(-1);
  return sign * Rational(1, 2) * sigma_density(2 * n + 1);
}

bool is_canonical_energy(const DensityPolynomial& p, int n) {
  int quadratic = 0;
  for (const auto& [orders, coeff] : p.terms()) {
    const int degree = static_cast<int>(orders.size());
    int order_sum = 0;
    for (int a : orders) order_sum += a;
    if (degree == 2) {
      if (orders != Orders{n - 1, n - 1} || coeff != Rational(1, 2)) return false;
      ++quadratic;
      continue;
    }
    if (degree < 3) return false;
    if (order_sum != 2 * n + 2 - 2 * degree) return false;
    if (orders.back() > n - 2) return false;
    if (!monomial_canonical(orders)) return false;
  }
  return quadratic == 1;
}

DensityPolynomial reduce_canonical(const DensityPolynomial& p, int n) {
  if (n < 1) throw std::invalid_argument("reduce_canonical: index must be positive");
  DensityPolynomial current = p;
  for (int pass = 0; pass < 10 * n; ++pass) {
    const bool settled = std::all_of(current.terms().begin(), current.terms().end(),
                                     [](const auto& term) { return monomial_canonical(term.first); });
    if (settled) {
      if (!is_canonical_energy(current, n))
        throw NumericalError("reduce_canonical: fixed point lacks the canonical E_n structure");
      return current;
    }
    current = reduction_pass(current);
  }
  throw NumericalError("reduce_canonical: no fixed point within 10n passes");
}

const DensityPolynomial& canonical_energy_density(int n) {
  require_energy_index(n, "canonical_energy_density");
  static std::array<std::optional<DensityPolynomial>, kMaxEnergyIndex + 1> cache;
  static std::mutex mutex;
  {
    std::lock_guard lock(mutex);
    if (cache[n]) return *cache[n];
  }
  auto reduced = reduce_canonical(energy_density(n), n);
  std::lock_guard lock(mutex);
  if (!cache[n]) cache[n] = std::move(reduced);
  return *cache[n];
}

DensityPolynomial variational_derivative(const DensityPolynomial& p) {
  DensityPolynomial out;
  for (const auto& [orders, coeff] : p.terms()) {
    for (std::size_t i = 0; i < orders.size();) {
      std::size_t j = i;
      while (j < orders.size() && orders[j] == orders[i]) ++j;
      const int a = orders[i];
      Orders reduced = orders;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
      auto partial = DensityPolynomial::monomial(coeff * Rational(static_cast<std::int64_t>(j - i)), reduced);
      for (int d = 0; d < a; ++d) partial = Rational(-1) * partial.derivative();
      out += partial;
      i = j;
    }
  }
  return out;
}

GridFunction eval_density(const DensityPolynomial& p, const GridFunction& f) {
  const int top = p.max_order();
  std::vector<GridFunction> derivs;
  derivs.reserve(static_cast<std::size_t>(std::max(top, 0) + 1));
  for (int k = 0; k <= top; ++k) derivs.push_back(spectral_derivative(f, k));
  GridFunction out(f.grid());
  out.mark_periodic(f.periodic());
  const std::size_t size = f.size();
  for (const auto& [orders, coeff] : p.terms()) {
    const double c = boost::rational_cast<double>(coeff);
    for (std::size_t x = 0; x < size; ++x) {
      double term = c;
      for (int a : orders) term *= derivs[static_cast<std::size_t>(a)][x];
      out[x] += term;
    }
  }
  return out;
}

double eval_energy(int n, const GridFunction& f) {
  return integrate(eval_density(canonical_energy_density(n), f));
}

GridFunction energy_gradient(int n, const GridFunction& f) {
  require_energy_index(n, "energy_gradient");
  static std::array<std::optional<DensityPolynomial>, kMaxEnergyIndex + 1> cache;
  static std::mutex mutex;
  DensityPolynomial grad;
  {
    std::lock_guard lock(mutex);
    if (!cache[n]) cache[n] = variational_derivative(energy_density(n));
    grad = *cache[n];
  }
  return eval_density(grad, f);
}

EulerLagrangeReport euler_lagrange_residual(const GridFunction& q, int n, std::span<const double> multipliers) {
  if (static_cast<int>(multipliers.size()) != n)
    throw std::invalid_argument("euler_lagrange_residual: need exactly n multipliers");
  const GridFunction target = energy_gradient(n + 1, q);
  GridFunction residual = target;
  for (int j = 1; j <= n; ++j) residual -= multipliers[j - 1] * energy_gradient(j, q);
  EulerLagrangeReport report;
  report.multipliers.assign(multipliers.begin(), multipliers.end());
  report.residual_norm = sobolev_norm(residual, 0);
  report.gradient_norm = sobolev_norm(target, 0);
  return report;
}

}  // namespace kdvlab
