#pragma once

#include <span>
#include <vector>

#include "kdvlab/field.hpp"

namespace kdvlab {

/// Multisoliton coordinates: amplitude parameters beta_1 > ... > beta_N > 0
/// and shifts c. Degree zero (both empty) is the zero function.
class SolitonConfig {
 public:
  SolitonConfig() = default;
  /// Throws std::invalid_argument unless betas are strictly decreasing,
  /// strictly positive, and the same length as shifts.
  SolitonConfig(std::vector<double> betas, std::vector<double> shifts);

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& shifts() const { return shifts_; }
  std::size_t degree() const { return betas_.size(); }

  /// Same betas, every shift moved by s.
  SolitonConfig translated(double s) const;
  SolitonConfig with_shifts(std::vector<double> shifts) const;

 private:
  std::vector<double> betas_;
  std::vector<double> shifts_;
};

/// Q_{beta,c}(x) = -2 d^2/dx^2 log det A(x) at a single point.
///
/// Evaluated in closed form from the rank-one structure of A' and A''. To stay
/// finite for x far left of the centres, each index with e^{-beta_j (x-c_j)} > 1
/// is rescaled out of A; the rescaling contributes a linear term to log det A
/// that the second derivative annihilates.
double multisoliton_at(const SolitonConfig& cfg, double x);

/// Samples Q_{beta,c} on the grid (OpenMP over nodes).
GridFunction eval_multisoliton(const SolitonConfig& cfg, const SpatialGrid& grid);
/// Single-threaded reference for eval_multisoliton.
GridFunction eval_multisoliton_serial(const SolitonConfig& cfg, const SpatialGrid& grid);

/// KdV flow on the manifold: c_j(t) = c_j + 4 beta_j^2 t.
SolitonConfig evolve_config(const SolitonConfig& cfg, double t);

/// sum_j Q_{beta^j, c^j}(x - offset_j).
GridFunction superpose(std::span<const SolitonConfig> configs, std::span<const double> offsets,
                       const SpatialGrid& grid);

/// Explicit one-soliton profile -2 beta^2 sech^2(beta (x - x0)).
double sech2_soliton(double beta, double x0, double x);
/// Centre x0 of the one-soliton with shift c: x0 = c - log(2 beta) / (2 beta).
double soliton_center(double beta, double shift);

}  // namespace kdvlab
