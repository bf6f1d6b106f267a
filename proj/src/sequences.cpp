#include "kdvlab/sequences.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "kdvlab/energy.hpp"
#include "kdvlab/evolve.hpp"

namespace kdvlab {

namespace {

constexpr double kEdgeEnvelope = 1e-12;

std::size_t points_for(double half_width, double spacing) {
  const auto needed = static_cast<std::size_t>(std::ceil(2.0 * half_width / spacing));
  return std::max<std::size_t>(256, std::bit_ceil(needed));
}

}  // namespace

GridFunction wigner_von_neumann(double c, double k, int index, const SpatialGrid& grid) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("c must be positive");
  if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("k must be non-negative");
  if (index < 1) throw std::invalid_argument("sequence index must be positive");
  const double n = index;
  const double L = grid.half_width();
  if (std::exp(-L * L / (2.0 * n * n)) >= kEdgeEnvelope)
    throw std::invalid_argument("grid too narrow for index " + std::to_string(index));
  const double amplitude = std::sqrt(c / n);
  return GridFunction::sample(grid, [=](double x) { return amplitude * std::exp(-x * x / (2.0 * n * n)) * std::cos(2.0 * k * x); });
}

SpatialGrid wigner_von_neumann_grid(int index) {
  if (index < 1) throw std::invalid_argument("sequence index must be positive");
  // e^{-L^2/(2n^2)} = 1e-12 at L = 7.43 n
  const double half_width = 7.5 * index;
  return {half_width, points_for(half_width, 0.25)};
}

double SequenceDiagnostics::max_beta() const {
  return bound_betas.empty() ? 0.0 : *std::max_element(bound_betas.begin(), bound_betas.end());
}

FrequencyGrid diagnostic_frequencies() { return make_frequency_grid(3.0, 1024); }

std::vector<SequenceDiagnostics> point_mass_diagnostics(std::span<const GridFunction> sequence,
                                                        std::span<const int> indices,
                                                        const FrequencyGrid& frequencies) {
  if (!indices.empty() && indices.size() != sequence.size())
    throw std::invalid_argument("indices and sequence differ in length");
  std::vector<SequenceDiagnostics> out;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const auto& u = sequence[i];
    SequenceDiagnostics d;
    d.index = indices.empty() ? static_cast<int>(i) : indices[i];
    for (int m = 1; m <= 3; ++m) d.energies.push_back(eval_energy(m, u));
    d.bound_betas = bound_states(u);
    d.profile = transmission_reciprocal(u, frequencies);  // parallel over k
    const auto moments = log_a_moments(d.profile, 2);
    d.gamma0 = moments.moments[0];
    d.gamma1 = moments.moments[1];

    double mass = 0.0, first = 0.0;
    for (std::size_t j = 0; j < frequencies.k.size(); ++j) {
      const double k = frequencies.k[j];
      const double w = frequencies.weights[j] * k * k * d.profile.log_abs_a[j];
      mass += w;
      first += w * k;
    }
    if (mass > 0.0) {
      d.center_k = first / mass;
      double second = 0.0;
      for (std::size_t j = 0; j < frequencies.k.size(); ++j) {
        const double k = frequencies.k[j];
        second += frequencies.weights[j] * k * k * d.profile.log_abs_a[j] * (k - d.center_k) * (k - d.center_k);
      }
      d.spread_k = std::sqrt(std::max(second / mass, 0.0));
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_csv(std::ostream& out, std::span<const SequenceDiagnostics> rows) {
  out << "idx,E1,E2,E3,max_beta,gamma0,gamma1,center_k,spread_k\n" << std::setprecision(17);
  for (const auto& r : rows)
    out << r.index << ',' << r.energies[0] << ',' << r.energies[1] << ',' << r.energies[2] << ',' << r.max_beta() << ','
        << r.gamma0 << ',' << r.gamma1 << ',' << r.center_k << ',' << r.spread_k << '\n';
}

std::vector<std::vector<double>> split_into_groups(const MinimizerReport& report) {
  int groups = 0;
  for (const auto& b : report.betas) groups = std::max(groups, b.mult);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(groups));
  for (int i = 0; i < groups; ++i)
    for (const auto& b : report.betas)
      if (b.mult > i) out[static_cast<std::size_t>(i)].push_back(b.value);
  return out;
}

std::vector<GasElement> gas_sequence(const ConstraintVector& e, int N, double separation, int count) {
  if (!(separation > 0.0) || !std::isfinite(separation)) throw std::invalid_argument("separation must be positive");
  if (count < 1) throw std::invalid_argument("count must be positive");
  const auto report = relaxed_minimize(e, N);
  const auto groups = split_into_groups(report);
  if (groups.empty()) throw std::invalid_argument("the origin has no gas sequence");
  double smallest = report.betas.front().value, largest = smallest;
  for (const auto& b : report.betas) {
    smallest = std::min(smallest, b.value);
    largest = std::max(largest, b.value);
  }

  std::vector<GasElement> out;
  for (int i = 0; i < count; ++i) {
    const double gap = separation * std::ldexp(1.0, i);
    const double spread = gap * static_cast<double>(groups.size() - 1);
    const SpatialGrid grid(0.5 * spread + 40.0 / smallest, points_for(0.5 * spread + 40.0 / smallest, 0.1 / largest));
    std::vector<SolitonConfig> configs;
    std::vector<double> offsets;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      configs.emplace_back(groups[g], std::vector<double>(groups[g].size(), 0.0));
      offsets.push_back(-0.5 * spread + gap * static_cast<double>(g));
    }
    out.push_back({gap, groups, superpose(configs, offsets, grid)});
  }
  return out;
}

double molecular_residual(std::span<const SolitonConfig> configs, std::span<const double> offsets, int n,
                          const SpatialGrid& grid) {
  if (configs.size() != offsets.size()) throw std::invalid_argument("one offset per group");
  std::vector<std::pair<double, double>> joined;  // (beta, shift)
  for (std::size_t g = 0; g < configs.size(); ++g)
    for (std::size_t j = 0; j < configs[g].degree(); ++j)
      joined.emplace_back(configs[g].betas()[j], configs[g].shifts()[j] + offsets[g]);
  std::sort(joined.begin(), joined.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> betas, hint;
  for (const auto& [b, c] : joined) {
    if (!betas.empty() && b == betas.back()) throw std::invalid_argument("betas must be distinct across groups");
    betas.push_back(b);
    hint.push_back(c);
  }
  const auto u = superpose(configs, offsets, grid);
  if (betas.empty()) return sobolev_norm(u, n);
  return manifold_distance(u, betas, n, hint).distance;
}

std::string region_name(Region region) {
  switch (region) {
    case Region::InteriorMnn:
      return "InteriorMnn";
    case Region::BoundaryMnn:
      return "BoundaryMnn";
    case Region::Gas:
      return "Gas";
    case Region::PointMass:
      return "PointMass";
    case Region::Infeasible:
      return "Infeasible";
    case Region::Origin:
      return "Origin";
  }
  return "Unknown";
}

PhaseDiagram phase_diagram_sample(std::span<const double, 2> e1_range, std::span<const double, 2> e2_range,
                                  int resolution) {
  if (resolution < 2 || resolution > 512) throw std::invalid_argument("resolution must lie in [2, 512]");
  if (!(e1_range[1] > e1_range[0]) || !(e2_range[1] > e2_range[0]))
    throw std::invalid_argument("ranges must be increasing");
  PhaseDiagram d;
  const auto r = static_cast<std::size_t>(resolution);
  for (std::size_t i = 0; i < r; ++i)
    d.e1.push_back(e1_range[0] + (e1_range[1] - e1_range[0]) * static_cast<double>(i + 1) / resolution);
  for (std::size_t j = 0; j < r; ++j)
    d.e2.push_back(e2_range[0] + (e2_range[1] - e2_range[0]) * static_cast<double>(j) / (resolution - 1));
  d.labels.resize(r * r);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(r); ++i)
    for (std::size_t j = 0; j < r; ++j)
      d.labels[static_cast<std::size_t>(i) * r + j] = classify({d.e1[static_cast<std::size_t>(i)], d.e2[j]});
  return d;
}

void write_csv(std::ostream& out, const PhaseDiagram& diagram) {
  out << "e1,e2,region,N_min\n" << std::setprecision(17);
  for (std::size_t i = 0; i < diagram.e1.size(); ++i)
    for (std::size_t j = 0; j < diagram.e2.size(); ++j) {
      const auto& label = diagram.at(i, j);
      out << diagram.e1[i] << ',' << diagram.e2[j] << ',' << region_name(label.tag) << ',';
      if (label.tag == Region::InteriorMnn || label.tag == Region::BoundaryMnn || label.tag == Region::Gas)
        out << label.degree;
      out << '\n';
    }
}

}  // namespace kdvlab
