#include "kdvlab/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "kdvlab/constraint.hpp"
#include "kdvlab/energy.hpp"
#include "kdvlab/evolve.hpp"
#include "kdvlab/scatter.hpp"
#include "kdvlab/sequences.hpp"
#include "kdvlab/soliton.hpp"

namespace kdvlab {

namespace {

// The oracles below are written out from the closed forms rather than taken
// from the library, so a wrong library formula cannot agree with itself.

double rel(double value, double expected) { return std::abs(value - expected) / std::max(1e-300, std::abs(expected)); }

double multisoliton_energy(int n, std::span<const double> betas) {
  double sum = 0.0;
  for (double b : betas) sum += std::pow(b, 2 * n + 1);
  return (n % 2 == 1 ? 1.0 : -1.0) * std::pow(2.0, 2 * n + 1) / (2 * n + 1) * sum;
}

Complex blaschke_product(std::span<const double> betas, Complex k) {
  Complex p = 1.0;
  for (double b : betas) p *= (k - Complex(0.0, b)) / (k + Complex(0.0, b));
  return p;
}

std::vector<double> distinct_betas(std::mt19937_64& rng, int count, double lo, double hi, double gap) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> b;
  while (static_cast<int>(b.size()) < count) {
    const double v = dist(rng);
    if (std::all_of(b.begin(), b.end(), [&](double w) { return std::abs(w - v) > gap; })) b.push_back(v);
  }
  std::sort(b.begin(), b.end(), std::greater<>());
  return b;
}

double power_sum(std::span<const double> betas, int p) {
  double s = 0.0;
  for (double b : betas) s += std::pow(b, p);
  return s;
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  Verdict() { detail << std::setprecision(3); }
  void require(bool ok) { pass = pass && ok; }
};

using Check = std::function<void(Verdict&, std::mt19937_64&)>;

void multisoliton_exactness(Verdict& v, std::mt19937_64&) {
  const SpatialGrid grid;
  double worst = 0.0;
  for (double beta : {0.5, 1.0, 2.0}) {
    const double x0 = 0.0;
    const double c = x0 + std::log(2.0 * beta) / (2.0 * beta);
    const auto q = eval_multisoliton(SolitonConfig({beta}, {c}), grid);
    for (std::size_t j = 0; j < grid.points(); ++j) {
      const double s = 1.0 / std::cosh(beta * (grid.node(j) - x0));
      worst = std::max(worst, std::abs(q[j] + 2.0 * beta * beta * s * s));
    }
  }
  v.require(worst < 1e-10);
  v.detail << "sup error " << worst;
}

void energy_formulas(Verdict& v, std::mt19937_64& rng) {
  const SpatialGrid grid;
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  double worst = 0.0, worst_shift = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 1 + trial % 3;
    const auto betas = distinct_betas(rng, N, 0.5, 2.0, 0.1);
    std::vector<double> c1, c2;
    for (int j = 0; j < N; ++j) {
      c1.push_back(shift(rng));
      c2.push_back(shift(rng));
    }
    const auto q1 = eval_multisoliton(SolitonConfig(betas, c1), grid);
    const auto q2 = eval_multisoliton(SolitonConfig(betas, c2), grid);
    for (int n = 1; n <= 4; ++n) {
      const double a = eval_energy(n, q1), b = eval_energy(n, q2);
      worst = std::max(worst, rel(a, multisoliton_energy(n, betas)));
      worst_shift = std::max(worst_shift, rel(a, b));
    }
  }
  v.require(worst < 1e-8 && worst_shift < 1e-8);
  v.detail << "formula rel " << worst << ", shift dependence rel " << worst_shift;
}

void canonical_densities(Verdict& v, std::mt19937_64&) {
  DensityPolynomial e1, e2, e3;
  e1.add_term(Rational(1, 2), {0, 0});
  e2.add_term(Rational(1, 2), {1, 1});
  e2.add_term(Rational(1), {0, 0, 0});
  e3.add_term(Rational(1, 2), {2, 2});
  e3.add_term(Rational(5), {0, 1, 1});
  e3.add_term(Rational(5, 2), {0, 0, 0, 0});
  const std::array expected{e1, e2, e3};
  int matched = 0;
  for (int n = 1; n <= 3; ++n) matched += reduce_canonical(energy_density(n), n) == expected[n - 1];
  v.require(matched == 3);
  v.detail << matched << "/3 exact; E3 = " << canonical_energy_density(3).to_string();
}

void trace_formulas(Verdict& v, std::mt19937_64&) {
  const SpatialGrid grid;
  const auto frequencies = make_frequency_grid(20.0, 512);
  const std::vector<SolitonConfig> solitons{SolitonConfig({1.0}, {0.0}), SolitonConfig({2.0, 1.0}, {-1.0, 2.0}),
                                            SolitonConfig({1.5, 0.8, 0.5}, {0.0, -2.0, 3.0})};
  double worst_soliton = 0.0;
  for (const auto& cfg : solitons) {
    const auto t = trace_residuals(eval_multisoliton(cfg, grid), 3, frequencies);
    for (std::size_t i = 0; i < 3; ++i) worst_soliton = std::max(worst_soliton, t.relative_residual(i));
  }
  const std::vector<std::function<double(double)>> potentials{
      [](double x) { return -1.8 / std::pow(std::cosh(x), 2); },
      [](double x) { return 0.5 * std::exp(-x * x); },
      [](double x) { return -1.2 * std::exp(-0.5 * x * x) * (1.0 + 0.3 * x); }};
  double worst_other = 0.0;
  for (const auto& f : potentials) {
    const auto t = trace_residuals(GridFunction::sample(grid, f), 3, frequencies);
    for (std::size_t i = 0; i < 3; ++i) worst_other = std::max(worst_other, t.relative_residual(i));
  }
  v.require(worst_soliton < 1e-6 && worst_other < 1e-4);
  v.detail << "multisoliton rel " << worst_soliton << ", reflecting rel " << worst_other;
}

void blaschke_identity(Verdict& v, std::mt19937_64& rng) {
  const SpatialGrid grid;
  const std::vector<double> betas{2.0, 1.0};
  const auto q = eval_multisoliton(SolitonConfig(betas, {-1.0, 1.5}), grid);
  const JostSolver solver(q);
  std::uniform_real_distribution<double> re(-5.0, 5.0), im(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    const Complex k(re(rng), im(rng));
    worst = std::max(worst, std::abs(solver.a(k) - blaschke_product(betas, k)));
  }
  double modulus = 0.0;
  for (const auto& a : transmission_reciprocal(q, make_frequency_grid(20.0, 512)).a_values)
    modulus = std::max(modulus, std::abs(std::abs(a) - 1.0));
  v.require(worst < 1e-6 && modulus < 1e-6);
  v.detail << "upper half-plane error " << worst << ", ||a|-1| " << modulus;
}

void constraint_solver(Verdict& v, std::mt19937_64& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const auto betas = distinct_betas(rng, n, 0.2, 3.0, 0.05);
    const auto r = solve_betas(constraints_of_betas(betas, n));
    if (static_cast<int>(r.betas.size()) != n) {
      worst = INFINITY;
      break;
    }
    for (int j = 0; j < n; ++j) worst = std::max(worst, rel(r.betas[j].value, betas[j]));
  }
  std::uniform_real_distribution<double> start(0.05, 5.0);
  double spread = 0.0;
  for (int n : {2, 3, 4, 5}) {
    const auto betas = distinct_betas(rng, n, 0.2, 3.0, 0.05);
    const auto e = constraints_of_betas(betas, n);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> init(static_cast<std::size_t>(n));
      for (auto& x : init) x = start(rng);
      std::sort(init.begin(), init.end(), std::greater<>());
      const auto r = solve_betas(e, init);
      for (int j = 0; j < n; ++j) spread = std::max(spread, rel(r.betas[j].value, betas[j]));
    }
  }
  v.require(worst < 1e-9 && spread < 1e-9);
  v.detail << "round trip rel " << worst << ", multi-start rel " << spread;
}

void gradient_of_C(Verdict& v, std::mt19937_64& rng) {
  double worst = 0.0, largest_lambda = -INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto e = constraints_of_betas(distinct_betas(rng, n, 0.2, 3.0, 0.05), n);
    const auto r = solve_betas(e);
    // Vieta: lambda_j = -4^{n+1-j} sigma_{n+1-j}(beta^2)
    std::vector<double> sigma{1.0};
    for (const auto& b : r.betas) {
      sigma.push_back(0.0);
      for (std::size_t i = sigma.size() - 1; i > 0; --i) sigma[i] += b.value * b.value * sigma[i - 1];
    }
    for (int j = 1; j <= n; ++j) {
      const double vieta = -std::pow(4.0, n + 1 - j) * sigma[static_cast<std::size_t>(n + 1 - j)];
      const double h = 1e-6 * std::abs(e[j - 1]);
      const auto at = [&](double offset) {
        auto moved = e;
        moved[j - 1] += offset;
        return solve_betas(moved).C;
      };
      const double fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      worst = std::max({worst, rel(vieta, fd), rel(r.lambda[j - 1], vieta)});
      largest_lambda = std::max(largest_lambda, r.lambda[j - 1]);
    }
  }
  v.require(worst < 1e-6 && largest_lambda < 0.0);
  v.detail << "lambda vs finite differences rel " << worst << ", max lambda " << largest_lambda;
}

void wiggle_derivative(Verdict& v, std::mt19937_64& rng) {
  double closed = 0.0, worst_order = INFINITY;
  for (int n = 1; n <= 4; ++n) {
    auto betas = distinct_betas(rng, n + 1, 0.3, 3.0, 0.1);
    std::shuffle(betas.begin(), betas.end(), rng);
    const double d_next = wiggle_direction(betas, n).d_next;
    // (2n+3) beta_{n+1}^2 prod_j (beta_{n+1}^2 - beta_j^2)
    const double b = betas[static_cast<std::size_t>(n)];
    double expected = (2 * n + 3) * b * b;
    for (int j = 0; j < n; ++j) expected *= b * b - betas[static_cast<std::size_t>(j)] * betas[static_cast<std::size_t>(j)];
    closed = std::max(closed, rel(d_next, expected));

    double err[2];
    const double eps[2] = {1e-2, 5e-3};
    for (int i = 0; i < 2; ++i) {
      const double up = power_sum(wiggle_step(betas, n, eps[i]), 2 * n + 3);
      const double down = power_sum(wiggle_step(betas, n, -eps[i]), 2 * n + 3);
      err[i] = std::abs((up - down) / (2.0 * eps[i]) - d_next);
    }
    const double floor = 1e-9 * std::abs(d_next);
    worst_order = std::min(worst_order, err[1] < floor ? 4.0 : err[0] / err[1]);
  }
  v.require(closed < 1e-10 && worst_order > 3.0);
  v.detail << "closed form rel " << closed << ", finite-difference error ratio at eps/2 " << worst_order;
}

void euler_lagrange(Verdict& v, std::mt19937_64&) {
  const SpatialGrid grid;
  double worst = 0.0;
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases{{{1.0}, {0.0}},
                                                                                {{2.0, 1.0}, {-2.0, 2.0}}};
  for (const auto& [betas, shifts] : cases) {
    const int n = static_cast<int>(betas.size());
    const auto report = solve_betas(constraints_of_betas(betas, n));
    const auto q = eval_multisoliton(SolitonConfig(betas, shifts), grid);
    const auto el = euler_lagrange_residual(q, n, report.lambda);
    worst = std::max(worst, el.residual_norm / el.gradient_norm);
  }
  v.require(worst < 1e-5);
  v.detail << "relative residual " << worst;
}

void kdv_evolution(Verdict& v, std::mt19937_64&) {
  const SpatialGrid grid;
  EvolutionSettings one;
  one.dt = 1e-3;
  one.T = 1.0;
  const SolitonConfig single({1.0}, {0.0});
  const double e_single =
      sobolev_norm(evolve_kdv(single, grid, one) - eval_multisoliton(SolitonConfig({1.0}, {4.0}), grid), 1);

  EvolutionSettings two;
  two.dt = 1e-4;
  two.T = 2.0;
  const SolitonConfig pair({2.0, 1.0}, {-5.0, 5.0});
  // exact flow: c_j + 4 beta_j^2 T
  const SolitonConfig pair_exact({2.0, 1.0}, {-5.0 + 32.0, 5.0 + 8.0});
  const double e_pair = sobolev_norm(evolve_kdv(pair, grid, two) - eval_multisoliton(pair_exact, grid), 1);

  double drift = 0.0;
  for (double d : conservation_drift(eval_multisoliton(single, grid), one, 3)) drift = std::max(drift, d);
  for (double d : conservation_drift(eval_multisoliton(pair, grid), two, 3)) drift = std::max(drift, d);
  v.require(e_single < 1e-6 && e_pair < 1e-5 && drift < 1e-6);
  v.detail << "one-soliton H1 " << e_single << ", collision H1 " << e_pair << ", drift " << drift;
}

void orbital_stability(Verdict& v, std::mt19937_64&) {
  const SpatialGrid grid;
  EvolutionSettings s;
  s.dt = 1e-3;
  s.T = 10.0;
  const std::vector<double> betas{1.0};
  const double exact = orbital_stability_experiment(betas, 0.0, s, 1, grid).sup_distance;
  const double small = orbital_stability_experiment(betas, 1e-3, s, 1, grid).sup_distance;
  const double large = orbital_stability_experiment(betas, 1e-2, s, 1, grid).sup_distance;
  const double ratio = large / small;
  v.require(exact < 1e-6 && small > 0.0 && ratio <= 15.0);
  v.detail << "delta=0 sup " << exact << ", ratio " << ratio;
}

void gas_regime(Verdict& v, std::mt19937_64&) {
  const ConstraintVector e{24.0, -100.0};
  const auto label = classify(e);
  const auto relaxed = relaxed_minimize(e, label.degree);
  const auto element = gas_sequence(e, label.degree, 80.0, 1).front();
  const double gap = std::abs(eval_energy(3, element.u) - relaxed.C);
  const double drift = std::max(rel(eval_energy(1, element.u), e[0]), rel(eval_energy(2, element.u), e[1]));
  v.require(label.tag == Region::Gas && relaxed.betas.size() <= 2 && gap < 1e-3 && drift < 1e-6);
  v.detail << label.to_string() << ", " << relaxed.betas.size() << " distinct values, E3 gap " << gap
           << ", constraint drift " << drift;
}

void point_mass_regime(Verdict& v, std::mt19937_64&) {
  const double root_pi = std::sqrt(std::numbers::pi);
  const std::array targets{root_pi / 4.0, root_pi, 4.0 * root_pi};
  const std::vector<int> indices{64, 256};
  std::vector<GridFunction> seq;
  for (int n : indices) seq.push_back(wigner_von_neumann(1.0, 1.0, n, wigner_von_neumann_grid(n)));
  const auto rows = point_mass_diagnostics(seq, indices);
  std::array<std::array<double, 3>, 2> err{};
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t m = 0; m < 3; ++m) err[r][m] = rel(rows[r].energies[m], targets[m]);
  const std::array tol{0.02, 0.02, 0.03};
  bool ok = true;
  for (std::size_t m = 0; m < 3; ++m) {
    ok = ok && err[0][m] < tol[m];
    ok = ok && (err[1][m] < err[0][m] || err[1][m] < 1e-10);
  }
  const double infimum = point_mass_infimum(targets[0], targets[1]).value;
  const double limit_gap = rel(infimum, targets[2]);
  ok = ok && limit_gap < 0.03 && rows[1].max_beta() < rows[0].max_beta();
  v.require(ok);
  v.detail << "index 64 errors " << err[0][0] << '/' << err[0][1] << '/' << err[0][2] << ", index 256 "
           << err[1][0] << '/' << err[1][1] << '/' << err[1][2] << ", infimum rel " << limit_gap << ", max beta "
           << rows[0].max_beta() << " -> " << rows[1].max_beta();
}

// n = 2 regions from the curves e2 = -B(e1) N^{-2/3}: N equal solitons give the
// smallest |E_2| at fixed E_1 among degree-N configurations.
RegionLabel expected_region(double e1, double e2) {
  if (e2 >= 0.0) return {Region::PointMass, 0};
  const double B = 32.0 / 5.0 * std::pow(3.0 / 8.0 * e1, 5.0 / 3.0);
  if (e2 < -B) return {Region::Infeasible, 0};
  if (e2 == -B) return {Region::BoundaryMnn, 1};
  const double needed = std::pow(B / -e2, 1.5);
  if (needed < 2.0) return {Region::InteriorMnn, 2};
  if (needed > 1e9) return {Region::Gas, 1000000000, true};
  return {Region::Gas, static_cast<int>(std::ceil(needed))};
}

bool same_region(const RegionLabel& a, const RegionLabel& b) { return a.tag == b.tag && a.degree == b.degree; }

void phase_diagram(Verdict& v, std::mt19937_64&) {
  const std::array e1_range{0.0, 10.0}, e2_range{-30.0, 5.0};
  const int res = 128;
  const auto start = std::chrono::steady_clock::now();
  const auto d = phase_diagram_sample(e1_range, e2_range, res);
  const double lattice_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto r = static_cast<std::size_t>(res);
  std::vector<RegionLabel> oracle(r * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) oracle[i * r + j] = expected_region(d.e1[i], d.e2[j]);
  // a cell may differ from the oracle only if a boundary passes within one cell
  const auto near_boundary = [&](std::size_t i, std::size_t j) {
    for (std::size_t a = i ? i - 1 : 0; a <= std::min(i + 1, r - 1); ++a)
      for (std::size_t b = j ? j - 1 : 0; b <= std::min(j + 1, r - 1); ++b)
        if (!same_region(oracle[a * r + b], oracle[i * r + j])) return true;
    return false;
  };
  int off = 0, boundary = 0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      if (!same_region(d.at(i, j), oracle[i * r + j])) (near_boundary(i, j) ? boundary : off)++;

  // solver-based classification on every 8th cell
  constexpr int kMaxDegree = 6;
  int solver_off = 0, sampled = 0;
  for (std::size_t i = 3; i < r; i += 8)
    for (std::size_t j = 3; j < r; j += 8) {
      ++sampled;
      const auto label = classify_by_solver({d.e1[i], d.e2[j]}, kMaxDegree);
      const auto& want = oracle[i * r + j];
      bool agree = same_region(label, want);
      if (want.tag == Region::Gas && want.degree > kMaxDegree)
        agree = label.tag == Region::Gas && label.degree_is_lower_bound && label.degree == kMaxDegree + 1;
      if (!agree && !near_boundary(i, j)) ++solver_off;
    }
  v.require(off == 0 && solver_off == 0);
  v.detail << off << " cells off a boundary disagree (" << boundary << " on one), solver " << solver_off << "/"
           << sampled << " disagree; lattice " << std::setprecision(2) << lattice_seconds << " s";
}

void molecular_decomposition(Verdict& v, std::mt19937_64&) {
  const SpatialGrid grid(120.0, 4096);
  const std::vector<SolitonConfig> groups{SolitonConfig({2.0}, {0.0}), SolitonConfig({1.0}, {0.0})};
  constexpr double kFloor = 1e-9;
  std::vector<double> r;
  for (double s : {20.0, 40.0, 80.0}) {
    const std::vector<double> offsets{-s, s};
    r.push_back(molecular_residual(groups, offsets, 2, grid));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < r.size(); ++i) monotone = monotone && (r[i] < r[i - 1] || r[i] < kFloor);
  v.require(monotone && r.back() < 1e-2);
  v.detail << "residuals " << r[0] << ", " << r[1] << ", " << r[2];
}

struct Entry {
  const char* title;
  Check check;
};

const std::array<Entry, kAcceptanceCriteria>& criteria() {
  static const std::array<Entry, kAcceptanceCriteria> table{{
      {"multisoliton exactness", multisoliton_exactness},
      {"energy formulas", energy_formulas},
      {"canonical densities", canonical_densities},
      {"trace formulas", trace_formulas},
      {"Blaschke identity", blaschke_identity},
      {"constraint solver", constraint_solver},
      {"gradient of C", gradient_of_C},
      {"wiggle derivative", wiggle_derivative},
      {"Euler-Lagrange", euler_lagrange},
      {"KdV evolution", kdv_evolution},
      {"orbital stability", orbital_stability},
      {"gas regime", gas_regime},
      {"point-mass regime", point_mass_regime},
      {"phase diagram", phase_diagram},
      {"molecular decomposition", molecular_decomposition},
  }};
  return table;
}

}  // namespace

CriterionResult run_criterion(int id, std::uint64_t seed) {
  if (id < 1 || id > kAcceptanceCriteria) throw std::invalid_argument("no criterion " + std::to_string(id));
  const auto& entry = criteria()[static_cast<std::size_t>(id - 1)];
  CriterionResult result;
  result.id = id;
  result.title = entry.title;
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(id));
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    entry.check(v, rng);
    result.pass = v.pass;
    result.detail = v.detail.str();
  } catch (const std::exception& e) {
    result.pass = false;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, std::span<const int> ids) {
  std::vector<CriterionResult> out;
  if (ids.empty()) {
    for (int id = 1; id <= kAcceptanceCriteria; ++id) out.push_back(run_criterion(id, seed));
  } else {
    for (int id : ids) out.push_back(run_criterion(id, seed));
  }
  return out;
}

void write_table(std::ostream& out, std::span<const CriterionResult> results) {
  int passed = 0;
  for (const auto& r : results) {
    passed += r.pass;
    out << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << std::left << std::setw(24) << r.title
        << std::right << std::fixed << std::setprecision(1) << std::setw(7) << r.seconds << " s  " << r.detail
        << '\n';
    out.unsetf(std::ios::fixed);
  }
  out << passed << "/" << results.size() << " criteria passed\n";
}

bool all_passed(std::span<const CriterionResult> results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

}  // namespace kdvlab
