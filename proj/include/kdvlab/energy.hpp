#pragma once

#include <span>
#include <vector>

#include "kdvlab/density.hpp"
#include "kdvlab/field.hpp"

namespace kdvlab {

/// Largest conserved-quantity index supported by energy_density.
inline constexpr int kMaxEnergyIndex = 6;

/// sigma_1 = u, sigma_{m+1} = -sigma_m' - sum_{j=1}^{m-1} sigma_j sigma_{m-j}.
DensityPolynomial sigma_density(int m);

/// (-1)^n / 2 * sigma_{2n+1}, unreduced (total derivatives are kept).
DensityPolynomial energy_density(int n);

/// Rewrites p modulo total derivatives into the canonical basis: every term is
/// either a power of u or has its highest derivative repeated. For an E_n
/// density this is 1/2 (u^(n-1))^2 plus terms of degree d >= 3 with order sum
/// 2n + 2 - 2d. Throws NumericalError if the rewriting does not settle within
/// 10n passes or the result violates that structure.
DensityPolynomial reduce_canonical(const DensityPolynomial& p, int n);

/// Structural check behind reduce_canonical.
bool is_canonical_energy(const DensityPolynomial& p, int n);

/// reduce_canonical(energy_density(n), n), memoized.
const DensityPolynomial& canonical_energy_density(int n);

/// Euler operator sum_a (-D)^a d p / d u^(a).
DensityPolynomial variational_derivative(const DensityPolynomial& p);

/// Pointwise evaluation of a density on f using spectral derivatives.
GridFunction eval_density(const DensityPolynomial& p, const GridFunction& f);

/// E_n(f). Integrates the canonical density, which needs derivatives only up
/// to order n-1.
double eval_energy(int n, const GridFunction& f);

/// Gradient of E_n at f (variational derivative of the unreduced density).
GridFunction energy_gradient(int n, const GridFunction& f);

struct EulerLagrangeReport {
  std::vector<double> multipliers;
  /// L^2 norm of grad E_{n+1}(q) - sum_j lambda_j grad E_j(q).
  double residual_norm = 0.0;
  /// L^2 norm of grad E_{n+1}(q), for relative comparisons.
  double gradient_norm = 0.0;
};

EulerLagrangeReport euler_lagrange_residual(const GridFunction& q, int n, std::span<const double> multipliers);

}  // namespace kdvlab
