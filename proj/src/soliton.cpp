#include "kdvlab/soliton.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "kdvlab/errors.hpp"

namespace kdvlab {

SolitonConfig::SolitonConfig(std::vector<double> betas, std::vector<double> shifts)
    : betas_(std::move(betas)), shifts_(std::move(shifts)) {
  if (betas_.size() != shifts_.size())
    throw std::invalid_argument("SolitonConfig: betas and shifts differ in length");
  for (std::size_t j = 0; j < betas_.size(); ++j) {
    if (!(betas_[j] > 0.0) || !std::isfinite(betas_[j]))
      throw std::invalid_argument("SolitonConfig: betas must be positive");
    if (!std::isfinite(shifts_[j])) throw std::invalid_argument("SolitonConfig: non-finite shift");
    if (j > 0 && !(betas_[j] < betas_[j - 1]))
      throw std::invalid_argument("SolitonConfig: betas must be strictly decreasing");
  }
}

SolitonConfig SolitonConfig::translated(double s) const {
  auto c = shifts_;
  for (auto& v : c) v += s;
  return SolitonConfig(betas_, std::move(c));
}

SolitonConfig SolitonConfig::with_shifts(std::vector<double> shifts) const {
  return SolitonConfig(betas_, std::move(shifts));
}

double multisoliton_at(const SolitonConfig& cfg, double x) {
  const auto n = static_cast<Eigen::Index>(cfg.degree());
  if (n == 0) return 0.0;
  const auto& beta = cfg.betas();
  const auto& c = cfg.shifts();

  Eigen::VectorXd d(n), d1(n), d2(n), s(n), s1(n), s2(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double b = beta[j];
    const double t = -b * (x - c[j]);
    if (t > 0.0) {
      const double dj = std::exp(-2.0 * t);
      d(j) = dj;
      d1(j) = 2.0 * b * dj;
      d2(j) = 4.0 * b * b * dj;
      s(j) = 1.0;
      s1(j) = 0.0;
      s2(j) = 0.0;
    } else {
      const double sj = std::exp(t);
      d(j) = 1.0;
      d1(j) = 0.0;
      d2(j) = 0.0;
      s(j) = sj;
      s1(j) = -b * sj;
      s2(j) = b * b * sj;
    }
  }

  Eigen::MatrixXd m(n, n), m1(n, n), m2(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double inv = 1.0 / (beta[j] + beta[k]);
      m(j, k) = s(j) * s(k) * inv;
      m1(j, k) = (s1(j) * s(k) + s(j) * s1(k)) * inv;
      m2(j, k) = (s2(j) * s(k) + 2.0 * s1(j) * s1(k) + s(j) * s2(k)) * inv;
    }
    m(j, j) += d(j);
    m1(j, j) += d1(j);
    m2(j, j) += d2(j);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("multisoliton: Cholesky factorization failed (ill-conditioned betas)");
  const Eigen::MatrixXd first = llt.solve(m1);
  const Eigen::MatrixXd second = llt.solve(m2);
  double cross = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) cross += first(j, k) * first(k, j);
  return -2.0 * (second.trace() - cross);
}

GridFunction eval_multisoliton(const SolitonConfig& cfg, const SpatialGrid& grid) {
  std::vector<double> v(grid.points(), 0.0);
  const auto count = static_cast<long>(v.size());
  if (cfg.degree() > 0) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (long j = 0; j < count; ++j) {
      try {
        v[j] = multisoliton_at(cfg, grid.node(static_cast<std::size_t>(j)));
      } catch (...) {
#pragma omp critical(kdvlab_soliton_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return GridFunction(grid, std::move(v));
}

GridFunction eval_multisoliton_serial(const SolitonConfig& cfg, const SpatialGrid& grid) {
  std::vector<double> v(grid.points(), 0.0);
  if (cfg.degree() > 0)
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = multisoliton_at(cfg, grid.node(j));
  return GridFunction(grid, std::move(v));
}

SolitonConfig evolve_config(const SolitonConfig& cfg, double t) {
  auto c = cfg.shifts();
  for (std::size_t j = 0; j < c.size(); ++j) c[j] += 4.0 * cfg.betas()[j] * cfg.betas()[j] * t;
  return cfg.with_shifts(std::move(c));
}

GridFunction superpose(std::span<const SolitonConfig> configs, std::span<const double> offsets,
                       const SpatialGrid& grid) {
  if (configs.size() != offsets.size())
    throw std::invalid_argument("superpose: one offset per configuration required");
  GridFunction sum(grid);
  for (std::size_t i = 0; i < configs.size(); ++i) sum += eval_multisoliton(configs[i].translated(offsets[i]), grid);
  return sum;
}

double sech2_soliton(double beta, double x0, double x) {
  const double sech = 1.0 / std::cosh(beta * (x - x0));
  return -2.0 * beta * beta * sech * sech;
}

double soliton_center(double beta, double shift) { return shift - std::log(2.0 * beta) / (2.0 * beta); }

}  // namespace kdvlab
