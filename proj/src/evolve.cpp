#include "kdvlab/evolve.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "kdvlab/energy.hpp"
#include "kdvlab/errors.hpp"
#include "kdvlab/fourier.hpp"

namespace kdvlab {

namespace {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

constexpr double kBlowUpFactor = 1e6;
constexpr int kContourPoints = 32;

// ETDRK4 (Cox-Matthews) with the Kassam-Trefethen contour evaluation of the
// phi-functions. L = i (k^3 + V k); N(v) = 3 i k F[(F^{-1} v)^2], truncated.
class Stepper {
 public:
  Stepper(const SpatialGrid& grid, double h, double dealias_fraction, double frame_speed) : grid_(grid) {
    const std::size_t size = grid.spectrum_size();
    const std::size_t nyquist = grid.points() / 2;
    const auto keep = static_cast<std::size_t>(std::floor(dealias_fraction * static_cast<double>(nyquist)));
    e_.resize(size);
    e2_.resize(size);
    q_.resize(size);
    f1_.resize(size);
    f2_.resize(size);
    f3_.resize(size);
    g_.resize(size);
    for (std::size_t j = 0; j < size; ++j) {
      const double k = grid.wavenumber(j);
      const Complex lh(0.0, h * (k * k * k + frame_speed * k));
      e_[j] = std::exp(lh);
      e2_[j] = std::exp(0.5 * lh);
      Complex q = 0.0, a = 0.0, b = 0.0, c = 0.0;
      for (int m = 0; m < kContourPoints; ++m) {
        const Complex z = lh + std::polar(1.0, 2.0 * std::numbers::pi * (m + 0.5) / kContourPoints);
        const Complex ez = std::exp(z), z3 = z * z * z;
        q += (std::exp(0.5 * z) - 1.0) / z;
        a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        b += (2.0 + z + ez * (z - 2.0)) / z3;
        c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      q_[j] = h * q / double(kContourPoints);
      f1_[j] = h * a / double(kContourPoints);
      f2_[j] = h * b / double(kContourPoints);
      f3_[j] = h * c / double(kContourPoints);
      g_[j] = (j <= keep && j != nyquist) ? Complex(0.0, 3.0 * k) : Complex(0.0);
    }
  }

  void step(Spectrum& v) const {
    const std::size_t size = v.size();
    const Spectrum nv = nonlinear(v);
    Spectrum a(size), b(size), c(size);
    for (std::size_t j = 0; j < size; ++j) a[j] = e2_[j] * v[j] + q_[j] * nv[j];
    const Spectrum na = nonlinear(a);
    for (std::size_t j = 0; j < size; ++j) b[j] = e2_[j] * v[j] + q_[j] * na[j];
    const Spectrum nb = nonlinear(b);
    for (std::size_t j = 0; j < size; ++j) c[j] = e2_[j] * a[j] + q_[j] * (2.0 * nb[j] - nv[j]);
    const Spectrum nc = nonlinear(c);
    for (std::size_t j = 0; j < size; ++j)
      v[j] = e_[j] * v[j] + nv[j] * f1_[j] + 2.0 * (na[j] + nb[j]) * f2_[j] + nc[j] * f3_[j];
  }

 private:
  Spectrum nonlinear(const Spectrum& v) const {
    auto u = fourier::inverse(v, grid_.points());
    for (double& x : u) x *= x;
    auto out = fourier::forward(u);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= g_[j];
    return out;
  }

  SpatialGrid grid_;
  Spectrum e_, e2_, q_, f1_, f2_, f3_, g_;
};

double spectral_mass(const Spectrum& v) {
  double sum = 0.0;
  for (const auto& c : v) sum += std::norm(c);
  return sum;
}

void require_evolvable(const GridFunction& u0) {
  if (!u0.line_valid() && !u0.periodic())
    throw std::invalid_argument("initial data must decay at the grid edges");
  for (double v : u0.values())
    if (!std::isfinite(v)) throw std::invalid_argument("initial data is not finite");
}

std::once_flag gsl_handler_once;

void quiet_gsl() {
  std::call_once(gsl_handler_once, [] { gsl_set_error_handler_off(); });
}

}  // namespace

void EvolutionSettings::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be non-negative");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw std::invalid_argument("dealias fraction must lie in (0, 1]");
  if (frame_speed && !std::isfinite(*frame_speed)) throw std::invalid_argument("frame speed must be finite");
}

std::size_t EvolutionSettings::step_count() const {
  validate();
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

double EvolutionSettings::explicit_step_bound(const SpatialGrid& grid) {
  return 2.8 * std::pow(grid.spacing() / std::numbers::pi, 3);
}

Trajectory evolve_trajectory(const GridFunction& u0, const EvolutionSettings& settings, std::size_t count) {
  settings.validate();
  require_evolvable(u0);
  if (count < 1) throw std::invalid_argument("need at least one sample");
  Trajectory out;
  GridFunction first = u0;
  first.mark_periodic();
  out.times.push_back(0.0);
  out.states.push_back(first);
  if (count == 1 || settings.T == 0.0) {
    for (std::size_t i = 1; i < count; ++i) {
      out.times.push_back(0.0);
      out.states.push_back(first);
    }
    return out;
  }

  const std::size_t intervals = count - 1;
  const std::size_t per_interval = std::max<std::size_t>(1, (settings.step_count() + intervals - 1) / intervals);
  const double h = settings.T / static_cast<double>(per_interval * intervals);
  const auto& grid = u0.grid();
  const Stepper stepper(grid, h, settings.dealias_fraction, settings.frame_speed.value_or(0.0));

  Spectrum v = fourier::forward(u0.values());
  v.back() = 0.0;  // Nyquist
  const double initial = spectral_mass(v);
  for (std::size_t i = 1; i <= intervals; ++i) {
    for (std::size_t s = 0; s < per_interval; ++s) {
      stepper.step(v);
      const double mass = spectral_mass(v);
      if (!std::isfinite(mass) || (initial > 0.0 && mass > kBlowUpFactor * kBlowUpFactor * initial))
        throw NumericalError("evolution blew up near t = " +
                             std::to_string(h * static_cast<double>((i - 1) * per_interval + s + 1)));
    }
    GridFunction state(grid, fourier::inverse(v, grid.points()));
    state.mark_periodic();
    out.times.push_back(settings.T * static_cast<double>(i) / static_cast<double>(intervals));
    out.states.push_back(std::move(state));
  }
  return out;
}

GridFunction evolve_kdv(const GridFunction& u0, const EvolutionSettings& settings) {
  return evolve_trajectory(u0, settings, 2).states.back();
}

void check_seam_clearance(const SolitonConfig& cfg, const SpatialGrid& grid, const EvolutionSettings& settings) {
  settings.validate();
  if (cfg.degree() == 0) return;
  const double speed = settings.frame_speed.value_or(0.0);
  const double margin = 10.0 / cfg.betas().back();
  for (std::size_t j = 0; j < cfg.degree(); ++j) {
    const double beta = cfg.betas()[j];
    const double start = soliton_center(beta, cfg.shifts()[j]);
    for (double t : {0.0, settings.T}) {
      const double x = start + (4.0 * beta * beta - speed) * t;
      if (std::abs(x) > grid.half_width() - margin)
        throw std::invalid_argument("soliton " + std::to_string(j + 1) + " comes within " + std::to_string(margin) +
                                    " of the periodic seam");
    }
  }
}

GridFunction evolve_kdv(const SolitonConfig& cfg, const SpatialGrid& grid, const EvolutionSettings& settings) {
  check_seam_clearance(cfg, grid, settings);
  return evolve_kdv(eval_multisoliton(cfg, grid), settings);
}

std::vector<double> conservation_drift(const GridFunction& u0, const EvolutionSettings& settings, int up_to_n,
                                       std::size_t samples) {
  if (up_to_n < 1 || up_to_n > kMaxEnergyIndex) throw std::invalid_argument("energy index out of range");
  const auto trajectory = evolve_trajectory(u0, settings, std::max<std::size_t>(samples, 2));
  std::vector<double> drift(static_cast<std::size_t>(up_to_n), 0.0);
  for (int m = 1; m <= up_to_n; ++m) {
    const double base = eval_energy(m, trajectory.states.front());
    for (const auto& state : trajectory.states) {
      const double change = std::abs(eval_energy(m, state) - base) / std::max(1.0, std::abs(base));
      drift[static_cast<std::size_t>(m - 1)] = std::max(drift[static_cast<std::size_t>(m - 1)], change);
    }
  }
  return drift;
}

namespace {

// ||u - Q_{beta,c}||_{H^n}^2 and its least-squares residual form.
class DistanceObjective {
 public:
  DistanceObjective(const GridFunction& u, std::span<const double> betas, int n)
      : u_(u), betas_(betas.begin(), betas.end()), n_(n) {
    const auto& grid = u.grid();
    const std::size_t nyquist = grid.points() / 2;
    weights_.resize(grid.spectrum_size());
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      const double k = grid.wavenumber(j);
      const double count = (j == 0 || j == nyquist) ? 1.0 : 2.0;
      weights_[j] = std::sqrt(count * std::pow(1.0 + k * k, n) * grid.spacing() / static_cast<double>(grid.points()));
    }
  }

  std::size_t residual_size() const { return 2 * weights_.size(); }
  std::size_t dimension() const { return betas_.size(); }

  void residuals(std::span<const double> shifts, std::span<double> out) const {
    const auto diff = u_ - eval_multisoliton(SolitonConfig(betas_, {shifts.begin(), shifts.end()}), u_.grid());
    const auto spec = fourier::forward(diff.values());
    for (std::size_t j = 0; j < spec.size(); ++j) {
      out[2 * j] = weights_[j] * spec[j].real();
      out[2 * j + 1] = weights_[j] * spec[j].imag();
    }
  }

  double squared(std::span<const double> shifts) const {
    std::vector<double> r(residual_size());
    residuals(shifts, r);
    double sum = 0.0;
    for (double v : r) sum += v * v;
    return sum;
  }

  int order() const { return n_; }

 private:
  const GridFunction& u_;
  std::vector<double> betas_;
  int n_;
  std::vector<double> weights_;
};

struct SimplexResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
};

double simplex_value(const gsl_vector* x, void* params) {
  const auto* objective = static_cast<const DistanceObjective*>(params);
  try {
    return objective->squared(std::span<const double>(x->data, x->size));
  } catch (...) {
    return GSL_POSINF;
  }
}

SimplexResult nelder_mead(const DistanceObjective& objective, const std::vector<double>& start, double step) {
  const std::size_t d = start.size();
  gsl_multimin_function fn{&simplex_value, d, const_cast<DistanceObjective*>(&objective)};
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(d), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(d), gsl_vector_free);
  for (std::size_t j = 0; j < d; ++j) gsl_vector_set(x.get(), j, start[j]);
  gsl_vector_set_all(ss.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, d), gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());
  SimplexResult out;
  for (int iter = 0; iter < 4000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-4) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  out.value = gsl_multimin_fminimizer_minimum(s.get());
  for (std::size_t j = 0; j < d; ++j) out.x.push_back(gsl_vector_get(s.get()->x, j));
  return out;
}

// Gauss-Newton on the weighted spectral residual, central-difference Jacobian.
SimplexResult polish(const DistanceObjective& objective, const SimplexResult& start) {
  const auto d = static_cast<Eigen::Index>(start.x.size());
  const auto rows = static_cast<Eigen::Index>(objective.residual_size());
  std::vector<double> x = start.x;
  Eigen::VectorXd r(rows);
  objective.residuals(x, {r.data(), static_cast<std::size_t>(rows)});
  double value = r.squaredNorm();
  Eigen::MatrixXd J(rows, d);
  Eigen::VectorXd plus(rows), minus(rows);
  for (int iter = 0; iter < 20; ++iter) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      objective.residuals(xp, {plus.data(), static_cast<std::size_t>(rows)});
      objective.residuals(xm, {minus.data(), static_cast<std::size_t>(rows)});
      J.col(j) = (plus - minus) / (2.0 * h);
    }
    const Eigen::VectorXd delta = J.colPivHouseholderQr().solve(-r);
    bool improved = false;
    for (double scale = 1.0; scale > 1e-3; scale *= 0.5) {
      auto trial = x;
      for (Eigen::Index j = 0; j < d; ++j) trial[j] += scale * delta(j);
      Eigen::VectorXd trial_r(rows);
      objective.residuals(trial, {trial_r.data(), static_cast<std::size_t>(rows)});
      if (trial_r.squaredNorm() < value) {
        x = std::move(trial);
        r = trial_r;
        value = r.squaredNorm();
        improved = true;
        break;
      }
    }
    if (!improved || delta.cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return {x, value, std::isfinite(value)};
}

// Local minima of u below zero, deepest first.
std::vector<double> trough_positions(const GridFunction& u) {
  const std::size_t m = u.size();
  std::vector<std::pair<double, double>> troughs;
  for (std::size_t j = 0; j < m; ++j) {
    const double left = u[(j + m - 1) % m], right = u[(j + 1) % m];
    if (u[j] < 0.0 && u[j] < left && u[j] <= right) troughs.emplace_back(u[j], u.grid().node(j));
  }
  std::sort(troughs.begin(), troughs.end());
  std::vector<double> out;
  for (const auto& t : troughs) out.push_back(t.second);
  return out;
}

}  // namespace

ManifoldFit manifold_distance(const GridFunction& u, std::span<const double> betas, int n,
                              const std::optional<std::vector<double>>& hint) {
  if (n < 0) throw std::invalid_argument("Sobolev order must be non-negative");
  const SolitonConfig probe(std::vector<double>(betas.begin(), betas.end()),
                            std::vector<double>(betas.size(), 0.0));  // validates betas
  const std::size_t d = betas.size();
  if (d == 0) return {sobolev_norm(u, n), {}};
  quiet_gsl();
  const DistanceObjective objective(u, betas, n);

  // Seeds: troughs assigned to betas in depth order, and in every order when
  // there are few of them. A trough at x corresponds to shift x + log(2b)/(2b).
  std::vector<std::vector<double>> seeds;
  if (hint) {
    if (hint->size() != d) throw std::invalid_argument("hint has the wrong length");
    seeds.push_back(*hint);
  }
  auto troughs = trough_positions(u);
  if (troughs.empty()) troughs.push_back(0.0);
  const std::size_t used = std::min(troughs.size(), d);
  std::vector<std::size_t> pick(d);
  for (std::size_t j = 0; j < d; ++j) pick[j] = std::min(j, used - 1);
  const auto to_shifts = [&](const std::vector<std::size_t>& order) {
    std::vector<double> c(d);
    for (std::size_t j = 0; j < d; ++j) c[j] = troughs[order[j]] + std::log(2.0 * betas[j]) / (2.0 * betas[j]);
    return c;
  };
  if (d <= 4) {
    std::sort(pick.begin(), pick.end());
    do seeds.push_back(to_shifts(pick));
    while (std::next_permutation(pick.begin(), pick.end()));
  } else {
    seeds.push_back(to_shifts(pick));
  }

  SimplexResult best;
  bool any = false;
  for (const auto& seed : seeds) {
    const auto result = nelder_mead(objective, seed, 0.5 / betas.back());
    if (result.converged) any = true;
    if (result.value < best.value) best = result;
  }
  if (!any) throw NumericalError("manifold distance: no simplex start converged");
  const auto polished = polish(objective, best);
  if (polished.converged && polished.value < best.value) best = polished;
  return {std::sqrt(std::max(best.value, 0.0)), best.x};
}

std::vector<double> collision_shifts(std::span<const double> betas, const EvolutionSettings& settings) {
  double mean = 0.0;
  for (double b : betas) mean += 4.0 * b * b;
  if (!betas.empty()) mean /= static_cast<double>(betas.size());
  const double speed = settings.frame_speed.value_or(mean);
  std::vector<double> shifts;
  for (double b : betas) shifts.push_back(-(4.0 * b * b - speed) * 0.5 * settings.T);
  return shifts;
}

StabilityTrace orbital_stability_experiment(std::span<const double> betas, double delta,
                                            const EvolutionSettings& settings, int n, const SpatialGrid& grid) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("perturbation size must be non-negative");
  if (betas.empty()) throw std::invalid_argument("need at least one soliton");
  EvolutionSettings frame = settings;
  double mean = 0.0;
  for (double b : betas) mean += 4.0 * b * b;
  frame.frame_speed = settings.frame_speed.value_or(mean / static_cast<double>(betas.size()));

  const std::vector<double> b(betas.begin(), betas.end());
  const SolitonConfig cfg(b, collision_shifts(betas, frame));
  check_seam_clearance(cfg, grid, frame);

  const double bump_at = soliton_center(b.front(), cfg.shifts().front());
  auto bump = GridFunction::sample(grid, [&](double x) { return std::exp(-(x - bump_at) * (x - bump_at)); });
  bump *= 1.0 / sobolev_norm(bump, n);
  const GridFunction u0 = eval_multisoliton(cfg, grid) + delta * bump;

  constexpr std::size_t kSamples = 32;
  const auto trajectory = evolve_trajectory(u0, frame, kSamples);
  StabilityTrace trace;
  std::vector<double> previous = cfg.shifts();
  for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
    const double t = trajectory.times[i];
    const double since = i == 0 ? 0.0 : t - trajectory.times[i - 1];
    std::vector<double> guess = previous;
    for (std::size_t j = 0; j < b.size(); ++j) guess[j] += (4.0 * b[j] * b[j] - *frame.frame_speed) * since;
    const auto fit = manifold_distance(trajectory.states[i], b, n, guess);
    previous = fit.shifts;
    trace.times.push_back(t);
    trace.distances.push_back(fit.distance);
    trace.sup_distance = std::max(trace.sup_distance, fit.distance);
  }
  return trace;
}

void write_csv(std::ostream& out, const StabilityTrace& trace) {
  out << "t,distance\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.times.size(); ++i) out << trace.times[i] << ',' << trace.distances[i] << '\n';
}

}  // namespace kdvlab
