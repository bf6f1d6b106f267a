#include "kdvlab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "kdvlab/fourier.hpp"

namespace kdvlab {

SpatialGrid::SpatialGrid(double half_width, std::size_t points)
    : half_width_(half_width), points_(points) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("SpatialGrid: half width must be positive");
  if (points < 256 || !std::has_single_bit(points))
    throw std::invalid_argument("SpatialGrid: point count must be a power of two >= 256");
}

std::vector<double> SpatialGrid::nodes() const {
  std::vector<double> x(points_);
  for (std::size_t j = 0; j < points_; ++j) x[j] = node(j);
  return x;
}

double SpatialGrid::wavenumber(std::size_t j) const {
  return std::numbers::pi * static_cast<double>(j) / half_width_;
}

GridFunction::GridFunction(SpatialGrid grid) : grid_(grid), values_(grid.points(), 0.0) {}

GridFunction::GridFunction(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.points())
    throw std::invalid_argument("GridFunction: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite value");
}

GridFunction GridFunction::sample(const SpatialGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.points());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
  return GridFunction(grid, std::move(v));
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::tail_max() const {
  const std::size_t band = std::max<std::size_t>(1, values_.size() / 40);  // 2.5% per side
  double m = 0.0;
  for (std::size_t j = 0; j < band; ++j) {
    m = std::max(m, std::abs(values_[j]));
    m = std::max(m, std::abs(values_[values_.size() - 1 - j]));
  }
  return m;
}

bool GridFunction::line_valid() const { return tail_max() <= 1e-10 * max_abs(); }

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("GridFunction: grid mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
  periodic_ = periodic_ || other.periodic_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("GridFunction: grid mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
  periodic_ = periodic_ || other.periodic_;
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction f) { return f *= s; }

GridFunction product(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("product: grid mismatch");
  GridFunction out(a.grid());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  out.mark_periodic(a.periodic() || b.periodic());
  return out;
}

GridFunction spectral_derivative(const GridFunction& f, int order) {
  if (order < 0) throw std::invalid_argument("spectral_derivative: negative order");
  if (!f.periodic() && !f.line_valid())
    throw std::invalid_argument("spectral_derivative: function has not decayed and is not flagged periodic");
  if (order == 0) return f;
  const auto& grid = f.grid();
  auto spec = fourier::forward(f.values());
  const std::size_t nyquist = grid.points() / 2;
  const fourier::Complex ik_unit(0.0, 1.0);
  for (std::size_t j = 0; j < spec.size(); ++j) {
    if (j == nyquist && order % 2 == 1) {
      spec[j] = 0.0;
      continue;
    }
    fourier::Complex multiplier(1.0, 0.0);
    const fourier::Complex ik = ik_unit * grid.wavenumber(j);
    for (int p = 0; p < order; ++p) multiplier *= ik;
    spec[j] *= multiplier;
  }
  GridFunction out(grid, fourier::inverse(spec, grid.points()));
  out.mark_periodic(f.periodic());
  return out;
}

double integrate(const GridFunction& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return f.grid().spacing() * sum;
}

double sobolev_norm(const GridFunction& f, int n) {
  if (n < 0) throw std::invalid_argument("sobolev_norm: negative order");
  const auto& grid = f.grid();
  const auto spec = fourier::forward(f.values());
  const std::size_t nyquist = grid.points() / 2;
  double sum = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double weight = (j == 0 || j == nyquist) ? 1.0 : 2.0;
    const double k = grid.wavenumber(j);
    sum += weight * std::pow(1.0 + k * k, n) * std::norm(spec[j]);
  }
  return std::sqrt(sum * grid.spacing() / static_cast<double>(grid.points()));
}

GridFunction fourier_shift(const GridFunction& f, double shift) {
  const auto& grid = f.grid();
  auto spec = fourier::forward(f.values());
  const std::size_t nyquist = grid.points() / 2;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double phase = grid.wavenumber(j) * shift;
    if (j == nyquist) {
      spec[j] *= std::cos(phase);
    } else {
      spec[j] *= std::polar(1.0, phase);
    }
  }
  GridFunction out(grid, fourier::inverse(spec, grid.points()));
  out.mark_periodic(f.periodic());
  return out;
}

void write_csv(std::ostream& out, const GridFunction& f) {
  const auto old_precision = out.precision();
  out << "x,value\n" << std::setprecision(17);
  for (std::size_t j = 0; j < f.size(); ++j) out << f.grid().node(j) << ',' << f[j] << '\n';
  out.precision(old_precision);
}

GridFunction read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,value", 0) != 0)
    throw std::invalid_argument("read_csv: expected header 'x,value'");
  std::vector<double> xs, vs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("read_csv: malformed row: " + line);
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 2) throw std::invalid_argument("read_csv: too few rows");
  const double half_width = -xs.front();
  SpatialGrid grid(half_width, xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (std::abs(xs[j] - grid.node(j)) > 1e-9 * std::max(1.0, half_width))
      throw std::invalid_argument("read_csv: nodes are not a uniform grid on [-L, L)");
  }
  return GridFunction(grid, std::move(vs));
}

}  // namespace kdvlab
