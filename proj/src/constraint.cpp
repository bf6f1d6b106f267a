#include "kdvlab/constraint.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace kdvlab {

namespace {

constexpr int kMaxNewtonSteps = 200;
constexpr double kResidualTolerance = 1e-13;
constexpr double kCollision = 1e-6;
constexpr int kMaxRelaxedDegree = 12;

void require_finite(const ConstraintVector& e) {
  if (e.empty()) throw std::invalid_argument("constraint vector is empty");
  for (double v : e)
    if (!std::isfinite(v)) throw std::invalid_argument("constraint vector has a non-finite entry");
}

// Targets s_m = e_m / energy_coefficient(m); a multisoliton needs all s_m > 0.
std::vector<double> power_sum_targets(const ConstraintVector& e) {
  std::vector<double> s(e.size());
  for (std::size_t m = 0; m < e.size(); ++m) s[m] = e[m] / energy_coefficient(static_cast<int>(m) + 1);
  return s;
}

bool all_zero(const ConstraintVector& e) {
  return std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
}

double weighted_power_sum(std::span<const double> x, std::span<const int> mult, int p) {
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) sum += mult[j] * std::pow(x[j], p);
  return sum;
}

// Relative homogenized residuals (S_m / s_m)^{1/(2m+1)} - 1 for m = 1..count.
std::vector<double> homogenized_residuals(std::span<const double> x, std::span<const int> mult,
                                          std::span<const double> s, std::size_t count) {
  std::vector<double> r(count);
  for (std::size_t m = 0; m < count; ++m) {
    const int p = 2 * static_cast<int>(m) + 3;
    r[m] = std::pow(weighted_power_sum(x, mult, p) / s[m], 1.0 / p) - 1.0;
  }
  return r;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

enum class Outcome { Converged, Vanishing, Collision, Stalled };

struct NewtonResult {
  Outcome outcome = Outcome::Stalled;
  std::vector<double> x;
  std::vector<int> mult;
};

// Newton on the raw power sums in extended precision. The map beta -> e can
// have condition numbers near 1e7, so the double-precision residual floor
// would otherwise leave visible error in beta.
void polish_extended(std::vector<double>& x, std::span<const int> mult, std::span<const double> s) {
  using Ld = long double;
  using MatrixL = Eigen::Matrix<Ld, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<Ld, Eigen::Dynamic, 1>;
  const auto d = static_cast<Eigen::Index>(x.size());
  VectorL v(d);
  for (Eigen::Index j = 0; j < d; ++j) v(j) = x[static_cast<std::size_t>(j)];
  const auto residual = [&](const VectorL& y) {
    VectorL r(d);
    for (Eigen::Index m = 0; m < d; ++m) {
      Ld sum = 0;
      for (Eigen::Index j = 0; j < d; ++j) sum += mult[static_cast<std::size_t>(j)] * std::pow(y(j), static_cast<int>(2 * m + 3));
      r(m) = sum / s[static_cast<std::size_t>(m)] - 1;
    }
    return r;
  };
  VectorL r = residual(v);
  for (int iter = 0; iter < 4; ++iter) {
    MatrixL J(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
      const int p = static_cast<int>(2 * m + 3);
      for (Eigen::Index j = 0; j < d; ++j)
        J(m, j) = p * mult[static_cast<std::size_t>(j)] * std::pow(v(j), p - 1) / s[static_cast<std::size_t>(m)];
    }
    const VectorL trial = v - J.fullPivLu().solve(r);
    if (!trial.allFinite() || (trial.array() <= 0).any()) break;
    const VectorL trial_r = residual(trial);
    if (!(trial_r.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff())) break;
    v = trial;
    r = trial_r;
  }
  for (Eigen::Index j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = static_cast<double>(v(j));
}

// Levenberg-Marquardt in z = log x on the first d homogenized equations. The system is symmetric under permuting equal
// multiplicities, so iterates are not kept ordered; the result is sorted.
constexpr double kMaxLogStep = 0.5;
// Cubic share of s_1 below which a parameter is not resolved by a residual
// at the convergence tolerance.
constexpr double kVanishing = 1e-9;

NewtonResult weighted_newton(std::span<const double> s, std::span<const int> mult_in, std::vector<double> x,
                             int max_steps = 4 * kMaxNewtonSteps) {
  const std::size_t d = x.size();
  std::vector<int> mult(mult_in.begin(), mult_in.end());
  Eigen::VectorXd z(d);
  for (std::size_t j = 0; j < d; ++j) z(static_cast<Eigen::Index>(j)) = std::log(x[j]);
  const auto residual = [&](const Eigen::VectorXd& zz) {
    std::vector<double> xx(d);
    for (std::size_t j = 0; j < d; ++j) xx[j] = std::exp(zz(static_cast<Eigen::Index>(j)));
    const auto r = homogenized_residuals(xx, mult, s, d);
    return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(d)).eval();
  };
  Eigen::VectorXd r = residual(z);
  double mu = 1e-3;
  int polish = 0;
  for (int step = 0; step < max_steps && r.allFinite(); ++step) {
    if (r.cwiseAbs().maxCoeff() < kResidualTolerance && ++polish > 2) break;
    Eigen::MatrixXd J(d, d);
    for (std::size_t m = 0; m < d; ++m) {
      const int p = 2 * static_cast<int>(m) + 3;
      std::vector<double> xx(d);
      for (std::size_t j = 0; j < d; ++j) xx[j] = std::exp(z(static_cast<Eigen::Index>(j)));
      const double S = weighted_power_sum(xx, mult, p);
      const double scale = std::pow(S / s[m], 1.0 / p) / S;
      // d/dz_j (S/s)^{1/p} = (S/s)^{1/p} / S * mult_j x_j^p
      for (std::size_t j = 0; j < d; ++j)
        J(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = scale * mult[j] * std::pow(xx[j], p);
    }
    const double r2 = r.squaredNorm();
    const auto n = static_cast<Eigen::Index>(d);
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      // Damped step from the augmented least-squares system [J; sqrt(mu) I].
      // Plain identity damping in log variables: column scaling lets nearly
      // dead parameters take huge steps and stall.
      Eigen::MatrixXd A(2 * n, n);
      A.topRows(n) = J;
      A.bottomRows(n) = std::sqrt(mu) * Eigen::MatrixXd::Identity(n, n);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
      rhs.head(n) = -r;
      const Eigen::VectorXd delta = A.colPivHouseholderQr().solve(rhs);
      if (!delta.allFinite()) {
        mu *= 4.0;
        continue;
      }
      const double longest = delta.cwiseAbs().maxCoeff();
      const Eigen::VectorXd trial_z = z + (longest > kMaxLogStep ? kMaxLogStep / longest : 1.0) * delta;
      const Eigen::VectorXd trial_r = residual(trial_z);
      if (trial_r.allFinite() && (trial_r.squaredNorm() < r2 || (polish > 0 && trial_r.squaredNorm() <= r2))) {
        z = trial_z;
        r = trial_r;
        mu = std::max(mu / 3.0, 1e-15);
        accepted = true;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted) break;
  }

  std::vector<double> final_x(d);
  for (std::size_t j = 0; j < d; ++j) final_x[j] = std::exp(z(static_cast<Eigen::Index>(j)));
  const auto lowest = std::min_element(final_x.begin(), final_x.end()) - final_x.begin();
  const bool resolved = mult[static_cast<std::size_t>(lowest)] * std::pow(final_x[static_cast<std::size_t>(lowest)], 3) >= kVanishing * s[0];
  if (resolved && r.allFinite() && r.cwiseAbs().maxCoeff() < 1e-9) polish_extended(final_x, mult, s);
  std::vector<std::pair<double, int>> sorted(d);
  for (std::size_t j = 0; j < d; ++j) sorted[j] = {final_x[j], mult[j]};
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  NewtonResult result;
  for (const auto& [v, m] : sorted) {
    result.x.push_back(v);
    result.mult.push_back(m);
  }
  const double top = result.x.front();
  double gap = top;
  for (std::size_t j = 1; j < d; ++j) gap = std::min(gap, result.x[j - 1] - result.x[j]);
  // A parameter whose cubic contribution is below the tolerance is not
  // resolved by the equations: the solution sits on the lower-degree stratum.
  const double smallest = result.x.back();
  const bool negligible = result.mult.back() * smallest * smallest * smallest < kVanishing * s[0];
  const bool solved = r.allFinite() && r.cwiseAbs().maxCoeff() < 1e3 * kResidualTolerance;
  if (negligible) result.outcome = Outcome::Vanishing;
  // Merging values only mean a collision when the merged point is (nearly) a
  // solution; otherwise this is a spurious local minimum.
  else if (d > 1 && gap < kCollision * top && r.allFinite() && r.cwiseAbs().maxCoeff() < 1e-6)
    result.outcome = Outcome::Collision;
  else result.outcome = solved ? Outcome::Converged : Outcome::Stalled;
  return result;
}

// Geometric ladder x_j = r rho^j matched to the first two targets.
std::vector<double> ladder_guess(std::span<const double> s, std::span<const int> mult, std::size_t d, double rho_hint) {
  std::vector<double> x(d);
  const auto sums = [&](double rho, int p) {
    double sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) sum += mult[j] * std::pow(rho, static_cast<double>(j * p));
    return sum;
  };
  double rho = rho_hint;
  if (rho <= 0.0 && d > 1 && s.size() > 1) {
    // ratio(rho) = S_5^{1/5} / S_3^{1/3} decreases in rho
    const double target = std::pow(s[1], 0.2) / std::cbrt(s[0]);
    const auto ratio = [&](double q) { return std::pow(sums(q, 5), 0.2) / std::cbrt(sums(q, 3)); };
    double lo = 1e-3, hi = 1.0 - 1e-3;
    if (target >= ratio(lo)) rho = lo;
    else if (target <= ratio(hi)) rho = hi;
    else {
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ratio(mid) > target ? lo : hi) = mid;
      }
      rho = 0.5 * (lo + hi);
    }
  }
  if (rho <= 0.0) rho = 0.5;
  const double r = std::cbrt(s[0] / sums(rho, 3));
  for (std::size_t j = 0; j < d; ++j) x[j] = r * std::pow(rho, static_cast<double>(j));
  return x;
}

// Follows the power sums from those of x0 to the targets s along a straight
// line in log coordinates, correcting with short LM runs and halving the step
// when a correction fails.
NewtonResult continuation(std::span<const double> s, std::span<const int> mult_in, std::vector<double> x0) {
  const std::size_t d = x0.size();
  std::vector<int> mult(mult_in.begin(), mult_in.end());
  std::vector<double> log_start(d), log_target(d), current(d);
  for (std::size_t m = 0; m < d; ++m) {
    log_start[m] = std::log(weighted_power_sum(x0, mult, 2 * static_cast<int>(m) + 3));
    log_target[m] = std::log(s[m]);
  }
  NewtonResult state{Outcome::Converged, std::move(x0), mult};
  double lambda = 0.0, h = 0.25;
  while (lambda < 1.0) {
    const double next = std::min(1.0, lambda + h);
    for (std::size_t m = 0; m < d; ++m) current[m] = std::exp((1.0 - next) * log_start[m] + next * log_target[m]);
    auto corrected = weighted_newton(current, state.mult, state.x, next < 1.0 ? 40 : 4 * kMaxNewtonSteps);
    if (corrected.outcome == Outcome::Converged) {
      state = std::move(corrected);
      lambda = next;
      h = std::min(2.0 * h, 0.5);
    } else {
      h *= 0.5;
      if (h < 1e-7) return corrected;
    }
  }
  return state;
}

// Solve the first d equations: direct LM from the supplied and fitted starts,
// then continuation from several ladders. Returns the first converged
// solution, or the most informative failure.
NewtonResult solve_pattern(std::span<const double> s, std::span<const int> mult,
                           const std::optional<std::vector<double>>& initial) {
  const std::size_t d = mult.size();
  std::vector<std::vector<double>> ladders{ladder_guess(s, mult, d, -1.0)};
  if (d > 1)
    for (double rho : {0.3, 0.6, 0.85}) ladders.push_back(ladder_guess(s, mult, d, rho));
  std::vector<std::vector<double>> direct;
  if (initial) {
    if (initial->size() != d || !std::all_of(initial->begin(), initial->end(), [](double v) { return v > 0.0 && std::isfinite(v); }))
      throw std::invalid_argument("initial guess must have positive entries");
    direct.push_back(*initial);
  }
  direct.push_back(ladders.front());

  NewtonResult last;
  bool saw_vanishing = false, saw_collision = false;
  const auto record = [&](NewtonResult&& result) {
    saw_vanishing |= result.outcome == Outcome::Vanishing;
    saw_collision |= result.outcome == Outcome::Collision;
    last = std::move(result);
  };
  for (const auto& start : direct) {
    auto result = weighted_newton(s, mult, start);
    if (result.outcome == Outcome::Converged) return result;
    record(std::move(result));
  }
  if (d > 1) {
    // Fixed-seed scattered starts: deterministic, and they reach the basin
    // in cases where the smooth ladders do not.
    std::mt19937_64 rng(0x5eed + d);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    const double scale = std::cbrt(s[0]);
    for (int trial = 0; trial < 64; ++trial) {
      std::vector<double> start(d);
      for (auto& v : start) v = scale * unit(rng);
      auto result = weighted_newton(s, mult, start, 5 * kMaxNewtonSteps);
      if (result.outcome == Outcome::Converged) return result;
      record(std::move(result));
    }
    for (const auto& start : ladders) {
      auto result = continuation(s, mult, start);
      if (result.outcome == Outcome::Converged) return result;
      record(std::move(result));
    }
  }
  last.outcome = saw_vanishing ? Outcome::Vanishing : saw_collision ? Outcome::Collision : Outcome::Stalled;
  return last;
}

bool remaining_fit(std::span<const double> x, std::span<const int> mult, std::span<const double> s) {
  const auto r = homogenized_residuals(x, mult, s, s.size());
  return max_abs(r) < 1e-10;
}

std::vector<double> elementary_symmetric(std::span<const double> y) {
  // coefficients of prod (1 + y_i t): sigma_0 .. sigma_d
  std::vector<double> sigma{1.0};
  for (double v : y) {
    sigma.push_back(0.0);
    for (std::size_t k = sigma.size() - 1; k > 0; --k) sigma[k] += v * sigma[k - 1];
  }
  return sigma;
}

MinimizerReport make_report(const ConstraintVector& e, std::vector<BetaMultiplicity> betas, RegionLabel region) {
  MinimizerReport report;
  report.n = static_cast<int>(e.size());
  report.betas = std::move(betas);
  report.region = region;
  double sum = 0.0;
  for (const auto& b : report.betas) sum += b.mult * std::pow(b.value, 2 * report.n + 3);
  report.C = energy_coefficient(report.n + 1) * sum;
  report.one_sided_gradient = static_cast<int>(report.betas.size()) < report.n;
  report.lambda = grad_C(report);
  return report;
}

}  // namespace

std::string RegionLabel::to_string() const {
  switch (tag) {
    case Region::InteriorMnn:
      return "InteriorMnn";
    case Region::BoundaryMnn:
      return "BoundaryMnn(" + std::to_string(degree) + ")";
    case Region::Gas:
      return degree_is_lower_bound ? "Gas(>=" + std::to_string(degree) + ")" : "Gas(" + std::to_string(degree) + ")";
    case Region::PointMass:
      return "PointMass";
    case Region::Infeasible:
      return "Infeasible";
    case Region::Origin:
      return "Origin";
  }
  return "Unknown";
}

int MinimizerReport::total_degree() const {
  int total = 0;
  for (const auto& b : betas) total += b.mult;
  return total;
}

std::vector<double> MinimizerReport::distinct_betas() const {
  std::vector<double> out;
  for (const auto& b : betas) out.push_back(b.value);
  return out;
}

double energy_coefficient(int m) {
  if (m < 1) throw std::invalid_argument("energy index must be positive");
  return (m % 2 == 1 ? 1.0 : -1.0) * std::ldexp(1.0, 2 * m + 1) / (2 * m + 1);
}

ConstraintVector constraints_of_betas(std::span<const BetaMultiplicity> betas, int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  ConstraintVector e(static_cast<std::size_t>(n), 0.0);
  for (const auto& b : betas) {
    if (!(b.value > 0.0) || b.mult < 1) throw std::invalid_argument("betas must be positive with positive multiplicity");
  }
  for (int m = 1; m <= n; ++m) {
    double sum = 0.0;
    for (const auto& b : betas) sum += b.mult * std::pow(b.value, 2 * m + 1);
    e[static_cast<std::size_t>(m - 1)] = energy_coefficient(m) * sum;
  }
  return e;
}

ConstraintVector constraints_of_betas(std::span<const double> betas, int n) {
  std::vector<BetaMultiplicity> b;
  for (double v : betas) b.push_back({v, 1});
  return constraints_of_betas(b, n);
}

MinimizerReport solve_betas(const ConstraintVector& e, const std::optional<std::vector<double>>& initial) {
  require_finite(e);
  const int n = static_cast<int>(e.size());
  if (all_zero(e)) return make_report(e, {}, {Region::Origin, 0});
  const auto s = power_sum_targets(e);
  for (double v : s)
    if (!(v > 0.0)) throw NotInMnn("constraint signs are not those of any multisoliton");

  for (int N = n; N >= 1; --N) {
    const std::vector<int> mult(static_cast<std::size_t>(N), 1);
    std::optional<std::vector<double>> start;
    if (initial && static_cast<int>(initial->size()) == N) start = initial;
    const auto result = solve_pattern(std::span(s).first(static_cast<std::size_t>(N)), mult, start);
    if (result.outcome == Outcome::Converged) {
      if (N < n && !remaining_fit(result.x, mult, s)) continue;
      std::vector<BetaMultiplicity> betas;
      for (double v : result.x) betas.push_back({v, 1});
      const RegionLabel region = N == n ? RegionLabel{Region::InteriorMnn, N} : RegionLabel{Region::BoundaryMnn, N};
      return make_report(e, std::move(betas), region);
    }
    if (result.outcome == Outcome::Collision && N == n)
      throw NotInMnn("parameters collide: constraints need more than " + std::to_string(n) + " solitons");
  }
  throw NotInMnn("no multisoliton of degree <= " + std::to_string(n) + " attains these constraints");
}

std::vector<double> grad_C(const MinimizerReport& report) {
  const int n = report.n;
  if (n < 1) throw std::invalid_argument("report has no constraint dimension");
  std::vector<double> lambda(static_cast<std::size_t>(n), 0.0);
  const auto values = report.distinct_betas();
  const int d = static_cast<int>(values.size());
  if (d == 0) return lambda;
  if (d == n) {
    std::vector<double> y;
    for (double b : values) y.push_back(b * b);
    const auto sigma = elementary_symmetric(y);
    for (int j = 1; j <= n; ++j)
      lambda[static_cast<std::size_t>(j - 1)] = -std::ldexp(1.0, 2 * (n + 1 - j)) * sigma[static_cast<std::size_t>(n + 1 - j)];
    return lambda;
  }
  // Reduced variables: stationarity in each distinct beta against the first d
  // constraints. Multiplicities cancel from both sides.
  Eigen::MatrixXd A(d, d);
  Eigen::VectorXd rhs(d);
  for (int i = 0; i < d; ++i) {
    const double b = values[static_cast<std::size_t>(i)];
    for (int j = 1; j <= d; ++j) A(i, j - 1) = energy_coefficient(j) * (2 * j + 1) * std::pow(b, 2 * j);
    rhs(i) = energy_coefficient(n + 1) * (2 * n + 3) * std::pow(b, 2 * n + 2);
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(rhs);
  for (int j = 0; j < d; ++j) lambda[static_cast<std::size_t>(j)] = x(j);
  return lambda;
}

double single_soliton_bound(double e1) {
  if (e1 < 0.0) throw std::invalid_argument("e1 must be nonnegative");
  return 32.0 / 5.0 * std::pow(3.0 / 8.0, 5.0 / 3.0) * std::pow(e1, 5.0 / 3.0);
}

RegionLabel classify(const ConstraintVector& e) {
  require_finite(e);
  if (all_zero(e)) return {Region::Origin, 0};
  if (e.size() == 1) return e[0] > 0.0 ? RegionLabel{Region::InteriorMnn, 1} : RegionLabel{Region::Infeasible, 0};
  if (e.size() != 2) return classify_by_solver(e);

  const double e1 = e[0], e2 = e[1];
  if (e1 <= 0.0) return {Region::Infeasible, 0};
  if (e2 >= 0.0) return {Region::PointMass, 0};
  const double B = single_soliton_bound(e1);
  const double tol = 1e-12 * B;
  if (e2 < -B - tol) return {Region::Infeasible, 0};
  if (std::abs(e2 + B) <= tol) return {Region::BoundaryMnn, 1};
  if (e2 < -std::pow(2.0, -2.0 / 3.0) * B) return {Region::InteriorMnn, 2};
  const double ratio = std::pow(B / -e2, 1.5);
  const double floor_ratio = std::floor(ratio);
  if (floor_ratio >= static_cast<double>(std::numeric_limits<int>::max() - 1))
    return {Region::Gas, std::numeric_limits<int>::max(), true};
  return {Region::Gas, static_cast<int>(floor_ratio) + 1};
}

RegionLabel classify_by_solver(const ConstraintVector& e, int max_degree) {
  require_finite(e);
  const int n = static_cast<int>(e.size());
  if (all_zero(e)) return {Region::Origin, 0};
  const auto s = power_sum_targets(e);
  if (!(s[0] > 0.0)) return {Region::Infeasible, 0};
  for (int m = 1; m < n; ++m) {
    if (!(s[static_cast<std::size_t>(m)] > 0.0)) return {n == 2 ? Region::PointMass : Region::Infeasible, 0};
  }
  // l^p norms are nonincreasing in p, with equality only for a single value.
  for (int m = 1; m < n; ++m) {
    const double prev = std::pow(s[static_cast<std::size_t>(m - 1)], 1.0 / (2 * m + 1));
    const double next = std::pow(s[static_cast<std::size_t>(m)], 1.0 / (2 * m + 3));
    if (next > prev * (1.0 + 1e-12)) return {Region::Infeasible, 0};
  }
  try {
    return solve_betas(e).region;
  } catch (const NotInMnn&) {
  }
  for (int N = n + 1; N <= max_degree; ++N) {
    try {
      relaxed_minimize(e, N);
      return {Region::Gas, N};
    } catch (const NotInMnn&) {
    }
  }
  return {Region::Gas, max_degree + 1, true};
}

WiggleResult wiggle_direction(std::span<const double> betas, int n) {
  if (n < 1 || static_cast<int>(betas.size()) != n + 1) throw std::invalid_argument("wiggle needs n+1 parameters");
  double top = 0.0;
  for (double b : betas) {
    if (!(b > 0.0)) throw std::invalid_argument("wiggle parameters must be positive");
    top = std::max(top, b);
  }
  for (std::size_t i = 0; i < betas.size(); ++i)
    for (std::size_t j = i + 1; j < betas.size(); ++j)
      if (std::abs(betas[i] - betas[j]) < 1e-12 * top) throw std::invalid_argument("wiggle parameters collide");

  const double moving = betas[static_cast<std::size_t>(n)];
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int k = 1; k <= n; ++k) {
    for (int j = 0; j < n; ++j) A(k - 1, j) = (2 * k + 1) * std::pow(betas[static_cast<std::size_t>(j)], 2 * k);
    b(k - 1) = (2 * k + 1) * std::pow(moving, 2 * k);
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(-b);
  WiggleResult out;
  double sum = std::pow(moving, 2 * n + 2);
  for (int j = 0; j < n; ++j) {
    out.tangent.push_back(x(j));
    sum += std::pow(betas[static_cast<std::size_t>(j)], 2 * n + 2) * x(j);
  }
  out.d_next = (2 * n + 3) * sum;
  return out;
}

double wiggle_derivative_closed_form(std::span<const double> betas, int n) {
  if (n < 1 || static_cast<int>(betas.size()) != n + 1) throw std::invalid_argument("wiggle needs n+1 parameters");
  const double y = betas[static_cast<std::size_t>(n)] * betas[static_cast<std::size_t>(n)];
  double product = (2 * n + 3) * y;
  for (int j = 0; j < n; ++j) product *= y - betas[static_cast<std::size_t>(j)] * betas[static_cast<std::size_t>(j)];
  return product;
}

std::vector<double> wiggle_step(std::span<const double> betas, int n, double step) {
  const auto w = wiggle_direction(betas, n);
  std::vector<double> held(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k)
    for (double b : betas) held[static_cast<std::size_t>(k - 1)] += std::pow(b, 2 * k + 1);
  std::vector<double> out(betas.begin(), betas.end());
  for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] += step * w.tangent[static_cast<std::size_t>(j)];
  out[static_cast<std::size_t>(n)] += step;
  if (!(out[static_cast<std::size_t>(n)] > 0.0)) throw std::invalid_argument("wiggle step drives the parameter below zero");

  // Newton back onto the held sums, beta_{n+1} frozen.
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd r(n);
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) {
      double sum = 0.0;
      for (double b : out) sum += std::pow(b, 2 * k + 1);
      r(k - 1) = sum - held[static_cast<std::size_t>(k - 1)];
      worst = std::max(worst, std::abs(r(k - 1)) / held[static_cast<std::size_t>(k - 1)]);
      for (int j = 0; j < n; ++j) A(k - 1, j) = (2 * k + 1) * std::pow(out[static_cast<std::size_t>(j)], 2 * k);
    }
    if (worst < 1e-15) break;
    const Eigen::VectorXd delta = A.fullPivLu().solve(-r);
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] += delta(j);
  }
  for (double b : out)
    if (!(b > 0.0) || !std::isfinite(b)) throw NumericalError("wiggle projection failed");
  return out;
}

namespace {

// Multiplicity vectors with at most max_parts entries, each >= 1, summing to at most total.
void enumerate_patterns(int total, int max_parts, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (!current.empty()) out.push_back(current);
  if (static_cast<int>(current.size()) == max_parts) return;
  const int used = std::accumulate(current.begin(), current.end(), 0);
  for (int m = 1; used + m <= total; ++m) {
    current.push_back(m);
    enumerate_patterns(total, max_parts, current, out);
    current.pop_back();
  }
}

}  // namespace

MinimizerReport relaxed_minimize(const ConstraintVector& e, int N) {
  require_finite(e);
  const int n = static_cast<int>(e.size());
  if (N < n) throw std::invalid_argument("relaxed degree must be at least n");
  if (N > kMaxRelaxedDegree) throw std::invalid_argument("relaxed degree is capped at 12");
  if (N == n) return solve_betas(e);
  if (all_zero(e)) return make_report(e, {}, {Region::Origin, 0});
  const auto s = power_sum_targets(e);
  for (double v : s)
    if (!(v > 0.0)) throw NotInMnn("constraint signs are not those of any multisoliton");

  std::vector<std::vector<int>> patterns;
  std::vector<int> current;
  enumerate_patterns(N, n, current, patterns);

  struct Candidate {
    std::vector<BetaMultiplicity> betas;
    double objective;
  };
  std::vector<std::optional<Candidate>> found(patterns.size());
  const auto count = static_cast<std::ptrdiff_t>(patterns.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < count; ++p) {
    const auto& mult = patterns[static_cast<std::size_t>(p)];
    const std::size_t d = mult.size();
    const auto result = solve_pattern(std::span(s).first(d), mult, std::nullopt);
    if (result.outcome != Outcome::Converged || !remaining_fit(result.x, result.mult, s)) continue;
    Candidate c;
    double sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      c.betas.push_back({result.x[j], result.mult[j]});
      sum += result.mult[j] * std::pow(result.x[j], 2 * n + 3);
    }
    c.objective = (n % 2 == 0 ? 1.0 : -1.0) * sum;
    found[static_cast<std::size_t>(p)] = std::move(c);
  }
  const Candidate* best = nullptr;
  for (const auto& c : found)
    if (c && (!best || c->objective < best->objective)) best = &*c;
  if (!best) throw NotInMnn("no pattern of total degree <= " + std::to_string(N) + " attains these constraints");

  int total = 0;
  bool repeated = false;
  for (const auto& b : best->betas) {
    total += b.mult;
    repeated |= b.mult > 1;
  }
  RegionLabel region{Region::Gas, total};
  if (!repeated) region = total == n ? RegionLabel{Region::InteriorMnn, n} : RegionLabel{Region::BoundaryMnn, total};
  return make_report(e, best->betas, region);
}

PointMassInfimum point_mass_infimum(double e1, double e2) {
  if (!(e1 > 0.0) || !std::isfinite(e1)) throw std::invalid_argument("point-mass infimum needs e1 > 0");
  if (!(e2 >= 0.0) || !std::isfinite(e2)) throw std::invalid_argument("point-mass infimum needs e2 >= 0");
  return {e2 * e2 / e1, std::numbers::pi / 4.0 * e1, std::numbers::pi / 16.0 * e2};
}

}  // namespace kdvlab
