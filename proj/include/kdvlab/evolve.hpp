#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "kdvlab/field.hpp"
#include "kdvlab/soliton.hpp"

namespace kdvlab {

/// Time stepping for u_t = -u''' + 6 u u' (ETDRK4, exact linear part).
struct EvolutionSettings {
  double dt = 1e-3;
  double T = 10.0;
  /// Fraction of the resolved wavenumbers kept in the nonlinear term (2/3 rule).
  double dealias_fraction = 2.0 / 3.0;
  /// Evolve in the frame x - V t. Unset means the lab frame, except in
  /// orbital_stability_experiment, which then co-moves with the mean speed.
  std::optional<double> frame_speed;

  /// Throws std::invalid_argument unless dt > 0, T >= 0, fraction in (0, 1].
  void validate() const;
  /// Steps actually taken: T split evenly in steps no longer than dt.
  std::size_t step_count() const;
  /// The step an explicit RK4 would need for the dispersion alone,
  /// 2.8 (h/pi)^3. Recorded in run manifests; the integrator does not need it.
  static double explicit_step_bound(const SpatialGrid& grid);
};

/// Samples u(t_i), t_i = i T / (count - 1), i = 0..count-1.
struct Trajectory {
  std::vector<double> times;
  std::vector<GridFunction> states;
};

/// u(T). Output is flagged periodic. Throws NumericalError when the L^2 norm
/// grows by more than 1e6 or turns non-finite.
GridFunction evolve_kdv(const GridFunction& u0, const EvolutionSettings& settings);

/// evolve_kdv of eval_multisoliton(cfg), after check_seam_clearance.
GridFunction evolve_kdv(const SolitonConfig& cfg, const SpatialGrid& grid, const EvolutionSettings& settings);

Trajectory evolve_trajectory(const GridFunction& u0, const EvolutionSettings& settings, std::size_t count);

/// Throws std::invalid_argument if some predicted centre c_j + (4 beta_j^2 - V) t
/// comes within 10/min(beta) of the periodic seam for t in [0, T].
void check_seam_clearance(const SolitonConfig& cfg, const SpatialGrid& grid, const EvolutionSettings& settings);

/// max_t |E_m(u(t)) - E_m(u0)| / max(1, |E_m(u0)|) over `samples` evenly
/// spaced times, m = 1..up_to_n.
std::vector<double> conservation_drift(const GridFunction& u0, const EvolutionSettings& settings, int up_to_n,
                                       std::size_t samples = 16);

struct ManifoldFit {
  double distance = 0.0;
  std::vector<double> shifts;
};

/// inf over c of ||u - Q_{beta,c}||_{H^n}. Nelder-Mead from trough-seeded
/// starts (and `hint`, when given), then a least-squares polish of the best.
/// Throws NumericalError when no start converges.
ManifoldFit manifold_distance(const GridFunction& u, std::span<const double> betas, int n,
                              const std::optional<std::vector<double>>& hint = {});

struct StabilityTrace {
  std::vector<double> times;
  std::vector<double> distances;
  double sup_distance = 0.0;
};

/// u0 = Q_{beta,c0} + delta phi, phi a Gaussian bump normalized in H^n. The
/// shifts c0 are chosen so that, in the co-moving frame, all solitons meet at
/// the origin at T/2. Distances are sampled at 32 times.
StabilityTrace orbital_stability_experiment(std::span<const double> betas, double delta,
                                            const EvolutionSettings& settings, int n, const SpatialGrid& grid);

/// The initial shifts used by orbital_stability_experiment.
std::vector<double> collision_shifts(std::span<const double> betas, const EvolutionSettings& settings);

/// CSV "t,distance", 17 significant digits.
void write_csv(std::ostream& out, const StabilityTrace& trace);

}  // namespace kdvlab
