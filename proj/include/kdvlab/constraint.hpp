#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdvlab/errors.hpp"

namespace kdvlab {

/// Constraint values e = (E_1, ..., E_n).
using ConstraintVector = std::vector<double>;

/// Raised when e is not attained by a multisoliton with at most n distinct
/// parameters.
class NotInMnn : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class Region { InteriorMnn, BoundaryMnn, Gas, PointMass, Infeasible, Origin };

struct RegionLabel {
  Region tag = Region::Infeasible;
  /// Degree N for BoundaryMnn, minimal degree N_min for Gas.
  int degree = 0;
  /// Gas only: no witness was found up to degree - 1, so degree is a lower bound.
  bool degree_is_lower_bound = false;

  std::string to_string() const;
  friend bool operator==(const RegionLabel&, const RegionLabel&) = default;
};

struct BetaMultiplicity {
  double value = 0.0;
  int mult = 1;
  friend bool operator==(const BetaMultiplicity&, const BetaMultiplicity&) = default;
};

struct MinimizerReport {
  int n = 0;
  /// Strictly decreasing values.
  std::vector<BetaMultiplicity> betas;
  /// E_{n+1} of the minimizer, C(e).
  double C = 0.0;
  /// lambda_j = dC/de_j.
  std::vector<double> lambda;
  RegionLabel region;
  /// Set when lambda was computed in reduced variables (boundary strata or
  /// fewer than n distinct values), where C is only one-sidedly differentiable.
  bool one_sided_gradient = false;

  int total_degree() const;
  /// Distinct values, each once.
  std::vector<double> distinct_betas() const;
};

/// (-1)^{m+1} 2^{2m+1}/(2m+1): E_m of a multisoliton is this times sum beta^{2m+1}.
double energy_coefficient(int m);

/// e_m = energy_coefficient(m) sum_j mult_j beta_j^{2m+1}, m = 1..n.
ConstraintVector constraints_of_betas(std::span<const BetaMultiplicity> betas, int n);
ConstraintVector constraints_of_betas(std::span<const double> betas, int n);

/// Distinct-parameter branch: the unique beta in the ordered simplex of degree
/// N <= n = e.size() with E_1..E_n = e. Newton on the homogenized power sums
/// (sum beta^{2m+1})^{1/(2m+1)}, started from a geometric ladder fitted to
/// (e_1, e_2) or from `initial` when given. When the smallest beta is driven
/// to zero the degree is reduced and the remaining equations are checked.
/// Throws NotInMnn when no degree <= n fits, std::invalid_argument for an
/// empty or non-finite e.
MinimizerReport solve_betas(const ConstraintVector& e, const std::optional<std::vector<double>>& initial = {});

/// Lagrange multipliers of C at the report's minimizer. With n distinct values
/// this is Vieta's formula lambda_j = -4^{n+1-j} sigma_{n+1-j}(beta^2); with
/// fewer, the reduced system in the first d constraints (remaining lambda = 0).
std::vector<double> grad_C(const MinimizerReport& report);

/// n = 1, 2: closed-form regions. Other n: classify_by_solver.
RegionLabel classify(const ConstraintVector& e);

/// Region from solver outcomes: solve_betas, then relaxed_minimize for
/// N = n+1..max_degree. Infeasibility uses the necessary condition that the
/// l^p norms (sum beta^p)^{1/p} do not increase with p. PointMass is only
/// reported for n = 2 (sign pattern e_1 > 0, e_2 >= 0).
RegionLabel classify_by_solver(const ConstraintVector& e, int max_degree = 12);

/// (32/5)(3/8)^{5/3} e_1^{5/3}: the largest |E_2| at fixed E_1 = e_1.
double single_soliton_bound(double e1);

struct WiggleResult {
  /// Derivatives of beta_1..beta_n when beta_{n+1} moves with unit speed and
  /// the first n odd power sums are held fixed.
  std::vector<double> tangent;
  /// Derivative of sum beta^{2n+3} along that motion.
  double d_next = 0.0;
};

/// betas: n+1 distinct positive values, the last one is the one driven.
WiggleResult wiggle_direction(std::span<const double> betas, int n);

/// (2n+3) beta_{n+1}^2 prod_{j<=n} (beta_{n+1}^2 - beta_j^2).
double wiggle_derivative_closed_form(std::span<const double> betas, int n);

/// Moves beta_{n+1} by `step` along the wiggle direction, then restores the
/// first n odd power sums by Newton in beta_1..beta_n.
std::vector<double> wiggle_step(std::span<const double> betas, int n, double step);

/// Minimizes E_{n+1} over parameters beta_1 >= ... >= beta_N >= 0 with the
/// first n energies fixed, by enumerating multiplicity patterns with at most
/// n distinct nonzero values (total multiplicity <= N, N <= 12). N = n
/// delegates to solve_betas. Throws NotInMnn if no pattern fits.
MinimizerReport relaxed_minimize(const ConstraintVector& e, int N);

struct PointMassInfimum {
  double value = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
};

/// inf E_3 over E_1 = e1 > 0, E_2 = e2 >= 0: e2^2/e1, with the optimizing
/// log|a| moments gamma0 = (pi/4) e1, gamma1 = (pi/16) e2.
PointMassInfimum point_mass_infimum(double e1, double e2);

}  // namespace kdvlab
