#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "kdvlab/field.hpp"

namespace kdvlab {

using Complex = std::complex<double>;

/// Frequencies k > 0 with composite Gauss-Legendre weights for integrals over
/// (0, k_max]: geometrically refined panels near k = 0, uniform beyond.
struct FrequencyGrid {
  std::vector<double> k;
  std::vector<double> weights;
  double k_max = 0.0;
};

/// points is rounded up to a multiple of the 16-point panel size.
FrequencyGrid make_frequency_grid(double k_max = 20.0, std::size_t points = 512);

/// Transmission reciprocal a(k) sampled on k > 0 (the k < 0 half follows by
/// conjugation) together with the bound-state parameters.
struct ScatteringSample {
  FrequencyGrid frequencies;
  std::vector<Complex> a_values;
  /// log|a(k)|, evaluated as log1p(|b|^2)/2 from the reflection-side
  /// coefficient so that reflectionless data give exact zeros.
  std::vector<double> log_abs_a;
  std::vector<double> bound_betas;
};

/// Jost solutions of -f'' + u f = k^2 f integrated across the grid's interval
/// with a fourth-order Magnus scheme at `substeps` and 2*`substeps` steps per
/// cell, Richardson-combined. u between nodes comes from spectral
/// interpolation, computed once per potential.
class JostSolver {
 public:
  explicit JostSolver(const GridFunction& u, int substeps = 1);

  /// W[f1, f2] = f1 f2' - f1' f2 at grid node `node` (default: mid-domain),
  /// with f1 ~ e^{ikx} at +L and f2 ~ e^{-ikx} at -L.
  Complex wronskian(Complex k, std::size_t node) const;
  Complex wronskian(Complex k) const { return wronskian(k, grid_.points() / 2); }

  struct Coefficients {
    Complex a;
    /// Coefficient of f1 in f2 = a conj(f1) + b f1; only meaningful for real k.
    Complex b;
    double log_abs_a = 0.0;
  };
  /// a(k) = -W[f1,f2] / (2ik); for real k also b(k) and log|a|.
  Coefficients coefficients(Complex k) const;
  Complex a(Complex k) const { return coefficients(k).a; }

  const SpatialGrid& grid() const { return grid_; }

 private:
  struct Level {
    int substeps;
    // gauss[2*s + g][j]: u at x_j + (s + c_g) h / substeps
    std::vector<std::vector<double>> gauss;
  };
  struct Propagated;

  SpatialGrid grid_;
  Level levels_[2];

  Propagated propagate_right(const Level& level, Complex k, std::size_t node) const;
  Propagated propagate_left(const Level& level, Complex k, std::size_t node) const;
  // W[f1,f2] and W[conj f1, f2] (the latter only for real k) at one level.
  void wronskians(const Level& level, Complex k, std::size_t node, Complex& w, Complex& w_conj) const;
};

/// W[f1,f2]; rejects k = 0 and Im k < 0, and flags potentials that have not
/// decayed at the interval ends.
Complex jost_wronskian(const GridFunction& u, Complex k);

/// a(k) on a frequency grid (OpenMP over k). bound_betas is left empty.
ScatteringSample transmission_reciprocal(const GridFunction& u, const FrequencyGrid& frequencies);
/// Single-threaded reference for transmission_reciprocal.
ScatteringSample transmission_reciprocal_serial(const GridFunction& u, const FrequencyGrid& frequencies);

/// Bound states -beta^2 of -d^2/dx^2 + u, decreasing. Brackets come from a
/// Sturm count on the central-difference operator; each is refined to a zero
/// of a(i kappa). Eigenvalues that agree to 1e-6 on the difference operator
/// (copies of one soliton far apart) are refined together and repeated; their
/// accuracy is limited by cancellation across the gaps, about 1e-4 for copies
/// 80 apart.
/// Throws NumericalError if a bracket does not refine.
std::vector<double> bound_states(const GridFunction& u);

struct MomentReport {
  /// moments[m-1] = integral over R of k^{2m} log|a(k)| dk, tail included.
  std::vector<double> moments;
  std::vector<double> tail_estimates;
  /// Set when some tail estimate exceeds 1% of its moment.
  bool tail_warning = false;
};

MomentReport log_a_moments(const ScatteringSample& sample, int up_to_n);

struct TraceReport {
  std::vector<double> energies;
  /// Right-hand side of the trace formula: log|a| moment plus bound-state sum.
  std::vector<double> trace_values;
  std::vector<double> residuals;
  std::vector<double> bound_betas;
  MomentReport moments;

  double relative_residual(std::size_t i) const;
};

/// E_n(u) minus its trace-formula expression, for n = 1..up_to_n.
TraceReport trace_residuals(const GridFunction& u, int up_to_n, const FrequencyGrid& frequencies);

/// Finite Blaschke product prod (k - i beta_m)/(k + i beta_m).
Complex blaschke(std::span<const double> betas, Complex k);

/// Multiplies a(k) by the Blaschke factors of new_betas and records them as
/// bound states; |a| on the real line is unchanged.
ScatteringSample add_bound_states(const ScatteringSample& sample, std::span<const double> new_betas);

/// Bound-state contribution (-1)^{n+1} 2^{2n+1}/(2n+1) sum beta^{2n+1}.
double bound_state_energy(int n, std::span<const double> betas);

/// ScatteringSample CSV: "k,re_a,im_a,log_abs_a".
void write_csv(std::ostream& out, const ScatteringSample& sample);

}  // namespace kdvlab
