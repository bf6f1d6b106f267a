#include "kdvlab/scatter.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "kdvlab/energy.hpp"
#include "kdvlab/errors.hpp"

namespace kdvlab {

namespace {

constexpr std::size_t kPanelPoints = 16;
constexpr double kRescaleAbove = 1e100;

// Gauss-Legendre nodes and weights on [-1, 1].
void legendre_rule(std::vector<double>& nodes, std::vector<double>& weights) {
  using Rule = boost::math::quadrature::gauss<double, kPanelPoints>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  nodes.clear();
  weights.clear();
  for (std::size_t i = x.size(); i-- > 0;) {
    nodes.push_back(-x[i]);
    weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    nodes.push_back(x[i]);
    weights.push_back(w[i]);
  }
}

void require_line_valid(const GridFunction& u) {
  if (!u.line_valid())
    throw std::invalid_argument("potential has not decayed at the interval ends (tail " +
                                std::to_string(u.tail_max()) + "); enlarge the grid");
}

// cosh(s) and sinh(s)/s as functions of s^2.
void cosh_sinhc(Complex s2, Complex& c, Complex& sc) {
  if (std::abs(s2) < 1e-6) {
    c = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
    sc = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
    return;
  }
  const Complex s = std::sqrt(s2);
  c = std::cosh(s);
  sc = std::sinh(s) / s;
}

}  // namespace

FrequencyGrid make_frequency_grid(double k_max, std::size_t points) {
  if (!(k_max > 0.0) || !std::isfinite(k_max)) throw std::invalid_argument("k_max must be positive");
  if (points < kPanelPoints) throw std::invalid_argument("need at least 16 frequency points");
  const std::size_t panels = (points + kPanelPoints - 1) / kPanelPoints;
  const std::size_t geometric = std::min<std::size_t>(6, panels / 4);
  const double width = k_max / static_cast<double>(panels - geometric);

  std::vector<double> edges{0.0};
  for (std::size_t i = geometric; i > 0; --i) edges.push_back(width / std::ldexp(1.0, static_cast<int>(i)));
  for (std::size_t i = 1; i + geometric <= panels; ++i) edges.push_back(width * static_cast<double>(i));
  edges.back() = k_max;

  std::vector<double> nodes, weights;
  legendre_rule(nodes, weights);
  FrequencyGrid out;
  out.k_max = k_max;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.k.push_back(mid + half * nodes[i]);
      out.weights.push_back(half * weights[i]);
    }
  }
  return out;
}

struct JostSolver::Propagated {
  Complex f;
  Complex df;
  Complex log_scale;
};

JostSolver::JostSolver(const GridFunction& u, int substeps) : grid_(u.grid()) {
  if (substeps < 1) throw std::invalid_argument("substeps must be positive");
  const double h = grid_.spacing();
  const double offsets[2] = {0.5 - std::sqrt(3.0) / 6.0, 0.5 + std::sqrt(3.0) / 6.0};
  for (int l = 0; l < 2; ++l) {
    Level& level = levels_[l];
    level.substeps = substeps << l;
    for (int s = 0; s < level.substeps; ++s) {
      for (double c : offsets) {
        const auto shifted = fourier_shift(u, (s + c) * h / level.substeps);
        level.gauss.emplace_back(shifted.values().begin(), shifted.values().end());
      }
    }
  }
}

namespace {

// One Magnus step: Omega = [[alpha, dx], [dx*qbar, -alpha]], exact for
// constant u; exp(+-Omega) = cosh(s) I +- sinh(s)/s Omega with
// s^2 = alpha^2 + dx^2 qbar. direction = -1 applies the inverse step.
inline void magnus_step(Complex q1, Complex q2, double dx, double direction, Complex& f, Complex& df) {
  const Complex qbar = 0.5 * (q1 + q2);
  const Complex alpha = (std::sqrt(3.0) / 12.0 * dx * dx) * (q1 - q2);
  const Complex s2 = alpha * alpha + dx * dx * qbar;
  Complex c, sc;
  if (s2.imag() == 0.0 && std::abs(s2.real()) >= 1e-6) {
    const double r = s2.real();
    if (r > 0.0) {
      const double root = std::sqrt(r);
      c = std::cosh(root);
      sc = std::sinh(root) / root;
    } else {
      const double root = std::sqrt(-r);
      c = std::cos(root);
      sc = std::sin(root) / root;
    }
  } else {
    cosh_sinhc(s2, c, sc);
  }
  const Complex g = direction * sc;
  const Complex nf = (c + g * alpha) * f + g * dx * df;
  const Complex ndf = g * dx * qbar * f + (c - g * alpha) * df;
  f = nf;
  df = ndf;
}

inline void rescale(Complex& f, Complex& df, Complex& log_scale) {
  const double size = std::abs(f) + std::abs(df);
  if (size > kRescaleAbove) {
    f /= size;
    df /= size;
    log_scale += std::log(size);
  }
}

}  // namespace

JostSolver::Propagated JostSolver::propagate_right(const Level& level, Complex k, std::size_t node) const {
  const double dx = grid_.spacing() / level.substeps;
  const Complex k2 = k * k;
  Propagated p{1.0, Complex(0.0, -1.0) * k, Complex(0.0, 1.0) * k * grid_.half_width()};
  for (std::size_t j = 0; j < node; ++j) {
    for (int s = 0; s < level.substeps; ++s)
      magnus_step(level.gauss[2 * s][j] - k2, level.gauss[2 * s + 1][j] - k2, dx, 1.0, p.f, p.df);
    rescale(p.f, p.df, p.log_scale);
  }
  return p;
}

JostSolver::Propagated JostSolver::propagate_left(const Level& level, Complex k, std::size_t node) const {
  const double dx = grid_.spacing() / level.substeps;
  const Complex k2 = k * k;
  Propagated p{1.0, Complex(0.0, 1.0) * k, Complex(0.0, 1.0) * k * grid_.half_width()};
  for (std::size_t j = grid_.points(); j-- > node;) {
    for (int s = level.substeps - 1; s >= 0; --s)
      magnus_step(level.gauss[2 * s][j] - k2, level.gauss[2 * s + 1][j] - k2, dx, -1.0, p.f, p.df);
    rescale(p.f, p.df, p.log_scale);
  }
  return p;
}

void JostSolver::wronskians(const Level& level, Complex k, std::size_t node, Complex& w, Complex& w_conj) const {
  const auto f1 = propagate_left(level, k, node);
  const auto f2 = propagate_right(level, k, node);
  const Complex ws = f1.f * f2.df - f1.df * f2.f;
  w = ws == 0.0 ? Complex(0.0) : std::exp(std::log(ws) + f1.log_scale + f2.log_scale);
  w_conj = 0.0;
  if (k.imag() == 0.0) {
    const Complex wc = std::conj(f1.f) * f2.df - std::conj(f1.df) * f2.f;
    w_conj = wc == 0.0 ? Complex(0.0) : std::exp(std::log(wc) + std::conj(f1.log_scale) + f2.log_scale);
  }
}

Complex JostSolver::wronskian(Complex k, std::size_t node) const {
  if (node > grid_.points()) throw std::invalid_argument("evaluation node outside the grid");
  Complex coarse, fine, unused;
  wronskians(levels_[0], k, node, coarse, unused);
  wronskians(levels_[1], k, node, fine, unused);
  return (16.0 * fine - coarse) / 15.0;
}

JostSolver::Coefficients JostSolver::coefficients(Complex k) const {
  if (k == 0.0) throw std::invalid_argument("k = 0 is excluded");
  const std::size_t node = grid_.points() / 2;
  Complex w0, wc0, w1, wc1;
  wronskians(levels_[0], k, node, w0, wc0);
  wronskians(levels_[1], k, node, w1, wc1);
  const Complex two_ik = Complex(0.0, 2.0) * k;
  Coefficients out;
  out.a = -((16.0 * w1 - w0) / 15.0) / two_ik;
  if (k.imag() == 0.0) {
    out.b = ((16.0 * wc1 - wc0) / 15.0) / two_ik;
    out.log_abs_a = 0.5 * std::log1p(std::norm(out.b));
  } else {
    out.b = Complex(std::nan(""), std::nan(""));
    out.log_abs_a = std::log(std::abs(out.a));
  }
  return out;
}

Complex jost_wronskian(const GridFunction& u, Complex k) {
  if (k == 0.0) throw std::invalid_argument("k = 0 is excluded");
  if (k.imag() < 0.0) throw std::invalid_argument("k must lie in the closed upper half-plane");
  require_line_valid(u);
  return JostSolver(u).wronskian(k);
}

namespace {

ScatteringSample empty_sample(const GridFunction& u, const FrequencyGrid& frequencies) {
  require_line_valid(u);
  for (double k : frequencies.k)
    if (!(k > 0.0)) throw std::invalid_argument("frequencies must be positive");
  ScatteringSample out;
  out.frequencies = frequencies;
  out.a_values.resize(frequencies.k.size());
  out.log_abs_a.resize(frequencies.k.size());
  return out;
}

}  // namespace

ScatteringSample transmission_reciprocal(const GridFunction& u, const FrequencyGrid& frequencies) {
  auto out = empty_sample(u, frequencies);
  const JostSolver solver(u);
  const auto count = static_cast<std::ptrdiff_t>(frequencies.k.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const auto c = solver.coefficients(frequencies.k[static_cast<std::size_t>(i)]);
      out.a_values[static_cast<std::size_t>(i)] = c.a;
      out.log_abs_a[static_cast<std::size_t>(i)] = c.log_abs_a;
    } catch (...) {
#pragma omp critical(kdvlab_scatter_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ScatteringSample transmission_reciprocal_serial(const GridFunction& u, const FrequencyGrid& frequencies) {
  auto out = empty_sample(u, frequencies);
  const JostSolver solver(u);
  for (std::size_t i = 0; i < frequencies.k.size(); ++i) {
    const auto c = solver.coefficients(frequencies.k[i]);
    out.a_values[i] = c.a;
    out.log_abs_a[i] = c.log_abs_a;
  }
  return out;
}

namespace {

// Number of eigenvalues below lambda of the Dirichlet central-difference
// operator -D^2 + u on the grid nodes (Sturm sequence / LDL^T inertia).
std::size_t count_below(std::span<const double> u, double h, double lambda) {
  const double off2 = 1.0 / (h * h * h * h);
  const double diag = 2.0 / (h * h);
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    q = diag + u[j] - lambda - (j == 0 ? 0.0 : off2 / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> discrete_kappas(const GridFunction& u) {
  const auto values = u.values();
  const double h = u.grid().spacing();
  const std::size_t n = count_below(values, h, 0.0);
  const double lower = *std::min_element(values.begin(), values.end()) - 1.0;
  std::vector<double> kappas;
  for (std::size_t i = 0; i < n; ++i) {
    // i-th smallest eigenvalue: count_below(lo) <= i < count_below(hi)
    double lo = lower, hi = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(values, h, mid) > i) hi = mid;
      else lo = mid;
    }
    kappas.push_back(std::sqrt(std::max(0.0, -0.5 * (lo + hi))));
  }
  return kappas;  // decreasing, since eigenvalues were increasing
}

}  // namespace

std::vector<double> bound_states(const GridFunction& u) {
  require_line_valid(u);
  const auto approx = discrete_kappas(u);
  if (approx.empty()) return {};
  const JostSolver solver(u);
  // a(i kappa) is real for real potentials.
  const auto a_of = [&](double kappa) { return solver.a(Complex(0.0, kappa)).real(); };

  // Widely separated copies of one soliton give eigenvalues that agree to far
  // below double precision; such a cluster is one zero of multiplicity m.
  constexpr double kCluster = 1e-6;
  std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [first, last)
  for (std::size_t j = 0; j < approx.size();) {
    std::size_t end = j + 1;
    while (end < approx.size() && approx[end - 1] - approx[end] < kCluster * approx[j]) ++end;
    clusters.emplace_back(j, end);
    j = end;
  }

  std::vector<double> betas;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto [first, last] = clusters[c];
    const double top = approx[first], bottom = approx[last - 1];
    const double upper = c == 0 ? top * 1.05 + 0.05 : 0.5 * (approx[first - 1] + top);
    const double lower = c + 1 == clusters.size() ? 0.5 * bottom : 0.5 * (bottom + approx[last]);
    const std::size_t m = last - first;
    double beta = 0.0;
    if (m == 1) {
      const double fa = a_of(lower), fb = a_of(upper);
      if (!(fa * fb < 0.0))
        throw NumericalError("bound state near beta = " + std::to_string(top) +
                             " did not refine; the grid is too coarse");
      std::uintmax_t iterations = 200;
      const auto tol = [](double a, double b) { return std::abs(b - a) < 1e-12; };
      const auto root = boost::math::tools::toms748_solve(a_of, lower, upper, fa, fb, tol, iterations);
      beta = 0.5 * (root.first + root.second);
    } else {
      // |a|^{1/m} has a V-shaped minimum at the cluster, so golden-section
      // search converges to full precision.
      const auto f = [&](double kappa) { return std::pow(std::abs(a_of(kappa)), 1.0 / static_cast<double>(m)); };
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = lower, b = upper;
      double x1 = b - g * (b - a), x2 = a + g * (b - a);
      double f1 = f(x1), f2 = f(x2);
      while (b - a > 1e-12 * b) {
        if (f1 < f2) {
          b = x2, x2 = x1, f2 = f1;
          x1 = b - g * (b - a), f1 = f(x1);
        } else {
          a = x1, x1 = x2, f1 = f2;
          x2 = a + g * (b - a), f2 = f(x2);
        }
      }
      beta = 0.5 * (a + b);
      if (!(f(beta) < 1e-3 * std::max(f(lower), f(upper))))
        throw NumericalError("bound-state cluster near beta = " + std::to_string(top) + " did not refine");
    }
    betas.insert(betas.end(), m, beta);
  }
  for (std::size_t j = 1; j < betas.size(); ++j)
    if (betas[j] > betas[j - 1]) throw NumericalError("bound states out of order");
  return betas;
}

namespace {

// Integral of k^{2m} g over [k_max, inf) for the exponential model
// g(k) = g_end exp(-rate (k - k_max)), via the recursion for incomplete gamma.
double exponential_tail(int power, double k_max, double g_end, double rate) {
  // I_p = int_K^inf k^p e^{-r(k-K)} dk = K^p / r + p/r I_{p-1}
  double value = 1.0 / rate;
  for (int p = 1; p <= power; ++p) value = std::pow(k_max, p) / rate + p / rate * value;
  return g_end * value;
}

}  // namespace

MomentReport log_a_moments(const ScatteringSample& sample, int up_to_n) {
  if (up_to_n < 1) throw std::invalid_argument("up_to_n must be positive");
  const auto& k = sample.frequencies.k;
  const auto& w = sample.frequencies.weights;
  if (k.empty() || sample.log_abs_a.size() != k.size() || w.size() != k.size())
    throw std::invalid_argument("scattering sample has no a-values");

  // Decay rate from the last two panels.
  const std::size_t last = k.size() - 1;
  const std::size_t earlier = k.size() > 2 * kPanelPoints ? last - kPanelPoints : 0;
  const double g_end = sample.log_abs_a[last];
  const double g_before = sample.log_abs_a[earlier];
  double rate = 0.0;
  if (g_end > 0.0 && g_before > g_end) rate = std::log(g_before / g_end) / (k[last] - k[earlier]);

  MomentReport report;
  for (int m = 1; m <= up_to_n; ++m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) sum += w[i] * std::pow(k[i], 2 * m) * sample.log_abs_a[i];
    double tail = 0.0;
    if (rate > 0.0) {
      tail = exponential_tail(2 * m, k[last], g_end, rate);
    } else if (g_end != 0.0) {
      // No visible decay: an O(k^-2) profile carried to 2 k_max, kept as a
      // size estimate rather than a correction.
      const double K = k[last];
      tail = g_end * K * K * (std::pow(2.0 * K, 2 * m - 1) - std::pow(K, 2 * m - 1)) / (2 * m - 1);
    }
    const double moment = 2.0 * (sum + tail);
    report.moments.push_back(moment);
    report.tail_estimates.push_back(2.0 * tail);
    if (std::abs(2.0 * tail) > 0.01 * std::abs(moment) && std::abs(moment) > 1e-12) report.tail_warning = true;
  }
  return report;
}

double bound_state_energy(int n, std::span<const double> betas) {
  double sum = 0.0;
  for (double b : betas) sum += std::pow(b, 2 * n + 1);
  return (n % 2 == 1 ? 1.0 : -1.0) * std::ldexp(1.0, 2 * n + 1) / (2 * n + 1) * sum;
}

double TraceReport::relative_residual(std::size_t i) const {
  const double scale = std::abs(energies.at(i));
  return scale > 0.0 ? std::abs(residuals.at(i)) / scale : std::abs(residuals.at(i));
}

TraceReport trace_residuals(const GridFunction& u, int up_to_n, const FrequencyGrid& frequencies) {
  if (up_to_n < 1 || up_to_n > kMaxEnergyIndex) throw std::invalid_argument("up_to_n out of range");
  auto sample = transmission_reciprocal(u, frequencies);
  TraceReport report;
  report.bound_betas = bound_states(u);
  sample.bound_betas = report.bound_betas;
  report.moments = log_a_moments(sample, up_to_n);
  for (int n = 1; n <= up_to_n; ++n) {
    const double energy = eval_energy(n, u);
    const double trace = std::ldexp(1.0, 2 * n) / std::numbers::pi * report.moments.moments[n - 1] +
                         bound_state_energy(n, report.bound_betas);
    report.energies.push_back(energy);
    report.trace_values.push_back(trace);
    report.residuals.push_back(energy - trace);
  }
  return report;
}

Complex blaschke(std::span<const double> betas, Complex k) {
  if (k.imag() < 0.0) throw std::invalid_argument("k must lie in the closed upper half-plane");
  Complex out = 1.0;
  for (double b : betas) {
    if (!(b > 0.0)) throw std::invalid_argument("Blaschke parameters must be positive");
    const Complex pole = k + Complex(0.0, b);
    if (std::abs(pole) < 1e-12 * std::max(1.0, b)) throw std::invalid_argument("k is at a pole");
    out *= (k - Complex(0.0, b)) / pole;
  }
  return out;
}

ScatteringSample add_bound_states(const ScatteringSample& sample, std::span<const double> new_betas) {
  std::vector<double> all = sample.bound_betas;
  for (double b : new_betas) {
    if (!(b > 0.0)) throw std::invalid_argument("bound-state parameters must be positive");
    for (double existing : all)
      if (std::abs(existing - b) <= 1e-12 * std::max(1.0, b))
        throw std::invalid_argument("duplicate bound-state parameter");
    all.push_back(b);
  }
  ScatteringSample out = sample;
  for (std::size_t i = 0; i < out.a_values.size(); ++i) out.a_values[i] *= blaschke(new_betas, out.frequencies.k[i]);
  std::sort(all.begin(), all.end(), std::greater<>());
  out.bound_betas = std::move(all);
  return out;
}

void write_csv(std::ostream& out, const ScatteringSample& sample) {
  const auto old_precision = out.precision(17);
  out << "k,re_a,im_a,log_abs_a\n";
  for (std::size_t i = 0; i < sample.a_values.size(); ++i)
    out << sample.frequencies.k[i] << ',' << sample.a_values[i].real() << ',' << sample.a_values[i].imag() << ','
        << sample.log_abs_a[i] << '\n';
  out.precision(old_precision);
}

}  // namespace kdvlab
