#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace kdvlab {

/// Uniform periodic grid on [-L, L) standing in for the real line.
/// Nodes are x_j = -L + j*h with h = 2L/M; M is a power of two, M >= 256.
class SpatialGrid {
 public:
  static constexpr double kDefaultHalfWidth = 40.0;
  static constexpr std::size_t kDefaultPoints = 2048;

  SpatialGrid() : SpatialGrid(kDefaultHalfWidth, kDefaultPoints) {}
  SpatialGrid(double half_width, std::size_t points);

  double half_width() const { return half_width_; }
  std::size_t points() const { return points_; }
  double spacing() const { return 2.0 * half_width_ / static_cast<double>(points_); }
  double node(std::size_t j) const { return -half_width_ + static_cast<double>(j) * spacing(); }
  std::vector<double> nodes() const;

  /// Number of coefficients in the real-to-complex spectrum.
  std::size_t spectrum_size() const { return points_ / 2 + 1; }
  /// Angular wavenumber of spectral index j (0 <= j <= M/2).
  double wavenumber(std::size_t j) const;

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  double half_width_;
  std::size_t points_;
};

/// Real function sampled on a SpatialGrid.
///
/// A function is "line-valid" when it has decayed on the outer 5% of nodes
/// (max there < 1e-10 * global max), i.e. when the periodic grid is a faithful
/// stand-in for the line. Functions that are genuinely periodic (test modes,
/// long-time PDE output) can be flagged as such to pass derivative checks.
class GridFunction {
 public:
  explicit GridFunction(SpatialGrid grid);
  GridFunction(SpatialGrid grid, std::vector<double> values);

  static GridFunction sample(const SpatialGrid& grid, const std::function<double(double)>& f);

  const SpatialGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }
  std::size_t size() const { return values_.size(); }

  double max_abs() const;
  /// Largest |value| on the outer 5% of nodes.
  double tail_max() const;
  bool line_valid() const;

  bool periodic() const { return periodic_; }
  GridFunction& mark_periodic(bool on = true) {
    periodic_ = on;
    return *this;
  }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

 private:
  SpatialGrid grid_;
  std::vector<double> values_;
  bool periodic_ = false;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction f);
/// Pointwise product.
GridFunction product(const GridFunction& a, const GridFunction& b);

/// order-th derivative via the Fourier multiplier (ik)^order. The Nyquist
/// mode is dropped for odd orders. Requires f line-valid or flagged periodic.
GridFunction spectral_derivative(const GridFunction& f, int order);

/// Rectangle rule h * sum(values); spectrally accurate for decaying f.
double integrate(const GridFunction& f);

/// H^n norm with Fourier weight (1+k^2)^n, normalized so n = 0 is the L^2 norm.
double sobolev_norm(const GridFunction& f, int n);

/// Resample by Fourier translation: returns f(x + shift) on the same grid.
GridFunction fourier_shift(const GridFunction& f, double shift);

/// CSV with header "x,value", 17 significant digits.
void write_csv(std::ostream& out, const GridFunction& f);
GridFunction read_csv(std::istream& in);

}  // namespace kdvlab
