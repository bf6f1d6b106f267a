#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "kdvlab/field.hpp"

namespace kdvlab::testing {

inline double sup_distance(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

inline double relative_error(double value, double expected) {
  return std::abs(value - expected) / std::max(1e-300, std::abs(expected));
}

/// Random trigonometric polynomial with modes below max_mode; periodic.
inline GridFunction random_band_limited(const SpatialGrid& grid, std::mt19937_64& rng, int max_mode = 12) {
  std::normal_distribution<double> normal;
  std::vector<double> a(static_cast<std::size_t>(max_mode)), b(static_cast<std::size_t>(max_mode));
  for (auto& v : a) v = normal(rng);
  for (auto& v : b) v = normal(rng);
  auto f = GridFunction::sample(grid, [&](double x) {
    double s = 0.0;
    for (int m = 0; m < max_mode; ++m) {
      const double k = grid.wavenumber(static_cast<std::size_t>(m));
      s += (a[m] * std::cos(k * x) + b[m] * std::sin(k * x)) / (1.0 + m);
    }
    return s;
  });
  f.mark_periodic();
  return f;
}

/// Random smooth decaying function: a few Gaussians with random centres,
/// widths and amplitudes, supported well inside the grid.
inline GridFunction random_decaying(const SpatialGrid& grid, std::mt19937_64& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> centre(-6.0, 6.0), width(0.8, 2.0), amp(-amplitude, amplitude);
  struct Bump {
    double a, c, w;
  };
  std::vector<Bump> bumps;
  for (int i = 0; i < 3; ++i) bumps.push_back({amp(rng), centre(rng), width(rng)});
  return GridFunction::sample(grid, [&](double x) {
    double s = 0.0;
    for (const auto& b : bumps) s += b.a * std::exp(-(x - b.c) * (x - b.c) / (b.w * b.w));
    return s;
  });
}

}  // namespace kdvlab::testing
