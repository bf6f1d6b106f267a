#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "kdvlab/constraint.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/scatter.hpp"
#include "kdvlab/soliton.hpp"

namespace kdvlab {

/// q(x) = sqrt(c/index) exp(-x^2 / (2 index^2)) cos(2 k x). Throws
/// std::invalid_argument when the envelope exceeds 1e-12 at the grid edge.
GridFunction wigner_von_neumann(double c, double k, int index, const SpatialGrid& grid);

/// Smallest grid with h <= 0.25 that satisfies wigner_von_neumann's edge condition.
SpatialGrid wigner_von_neumann_grid(int index);

struct SequenceDiagnostics {
  int index = 0;
  /// E_1, E_2, E_3.
  std::vector<double> energies;
  std::vector<double> bound_betas;
  /// Full-line moments of k^2 log|a| and k^4 log|a|.
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  /// Mean and standard deviation of the measure k^2 log|a(k)| dk on k > 0.
  double center_k = 0.0;
  double spread_k = 0.0;
  /// log|a| on the frequency grid used.
  ScatteringSample profile;

  double max_beta() const;
};

/// Frequencies used by point_mass_diagnostics: dense on [0, 3], where the
/// Wigner-von Neumann reflection concentrates for k0 near 1.
FrequencyGrid diagnostic_frequencies();

/// Energies, bound states and log|a| concentration statistics of each element.
/// Indices are taken from `indices` (or 0, 1, ... when empty). Parallel over
/// elements.
std::vector<SequenceDiagnostics> point_mass_diagnostics(std::span<const GridFunction> sequence,
                                                        std::span<const int> indices = {},
                                                        const FrequencyGrid& frequencies = diagnostic_frequencies());

/// CSV "idx,E1,E2,E3,max_beta,gamma0,gamma1,center_k,spread_k".
void write_csv(std::ostream& out, std::span<const SequenceDiagnostics> rows);

/// Groups of a relaxed minimizer: the i-th copy of every repeated value goes to
/// group i, so each group has distinct values. Groups are listed largest first.
std::vector<std::vector<double>> split_into_groups(const MinimizerReport& report);

struct GasElement {
  double separation = 0.0;
  std::vector<std::vector<double>> groups;
  GridFunction u;
};

/// Element i superposes the groups of relaxed_minimize(e, N), every shift
/// zero, at offsets spaced separation * 2^i apart and centred on the origin.
/// Each element gets its own grid, wide enough for the spread plus 40/min beta.
/// Throws NotInMnn when e is not attained at degree N.
std::vector<GasElement> gas_sequence(const ConstraintVector& e, int N, double separation, int count);

/// Distance in H^n between sum_j Q_{beta^j, c^j}(x - offset_j) and the
/// multisoliton with all betas concatenated, minimized over its shifts.
/// Requires distinct betas across groups.
double molecular_residual(std::span<const SolitonConfig> configs, std::span<const double> offsets, int n,
                          const SpatialGrid& grid);

struct PhaseDiagram {
  std::vector<double> e1;
  std::vector<double> e2;
  /// labels[i * e2.size() + j] is the label at (e1[i], e2[j]).
  std::vector<RegionLabel> labels;

  const RegionLabel& at(std::size_t i, std::size_t j) const { return labels[i * e2.size() + j]; }
};

/// classify on a resolution x resolution lattice. e1 runs over
/// lo + (hi - lo)(i + 1)/resolution (the lower end excluded, so e1 = 0 can be
/// left out), e2 over lo + (hi - lo) j/(resolution - 1). resolution <= 512.
PhaseDiagram phase_diagram_sample(std::span<const double, 2> e1_range, std::span<const double, 2> e2_range,
                                  int resolution);

/// CSV "e1,e2,region,N_min"; N_min is the degree for InteriorMnn, BoundaryMnn
/// and Gas, empty otherwise.
void write_csv(std::ostream& out, const PhaseDiagram& diagram);

/// Region name without the degree, e.g. "Gas".
std::string region_name(Region region);

}  // namespace kdvlab
