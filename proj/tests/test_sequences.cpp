#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kdvlab/energy.hpp"
#include "kdvlab/sequences.hpp"
#include "test_support.hpp"

using namespace kdvlab;
using kdvlab::testing::relative_error;

namespace {

const double kRootPi = std::sqrt(std::numbers::pi);

}  // namespace

TEST_CASE("Wigner-von Neumann profile") {
  const auto grid = wigner_von_neumann_grid(16);
  const auto q = wigner_von_neumann(1.0, 1.0, 16, grid);
  CHECK(q[grid.points() / 2] == doctest::Approx(0.25));  // x = 0
  CHECK(q.line_valid());
  CHECK_THROWS_AS(wigner_von_neumann(1.0, 1.0, 64, grid), std::invalid_argument);
  CHECK_THROWS_AS(wigner_von_neumann(0.0, 1.0, 16, grid), std::invalid_argument);

  // E_1 -> sqrt(pi)/4 c; at k = 0 the profile is a wide bump with E_2 -> 0
  CHECK(relative_error(eval_energy(1, q), kRootPi / 4.0) < 1e-10);
  double previous = 1.0;
  for (int n : {4, 16, 64}) {
    const auto flat = wigner_von_neumann(1.0, 0.0, n, wigner_von_neumann_grid(n));
    const double e2 = std::abs(eval_energy(2, flat));
    CHECK(e2 < previous);
    previous = e2;
  }
  CHECK(previous < 0.25);  // the cubic term decays like n^{-1/2}
}

TEST_CASE("point-mass diagnostics along the sequence") {
  std::vector<GridFunction> seq;
  const std::vector<int> indices{16, 64};
  for (int n : indices) seq.push_back(wigner_von_neumann(1.0, 1.0, n, wigner_von_neumann_grid(n)));
  const auto rows = point_mass_diagnostics(seq, indices);
  REQUIRE(rows.size() == 2);
  const auto infimum = point_mass_infimum(kRootPi / 4.0, kRootPi);
  CHECK(infimum.value == doctest::Approx(4.0 * kRootPi));
  double prev_e3 = 1e9;
  for (const auto& r : rows) {
    CHECK(r.energies[2] > infimum.value);  // approached from above
    CHECK(r.energies[2] < prev_e3);
    prev_e3 = r.energies[2];
    CHECK(std::abs(r.center_k - 1.0) < 1e-2);
    // gamma moments against the trace formula with the (small) bound-state terms removed
    CHECK(relative_error(r.gamma0, std::numbers::pi / 4.0 * (r.energies[0] - bound_state_energy(1, r.bound_betas))) < 1e-4);
    CHECK(relative_error(r.gamma1, std::numbers::pi / 16.0 * (r.energies[1] - bound_state_energy(2, r.bound_betas))) < 1e-4);
  }
  CHECK(rows[1].spread_k < rows[0].spread_k);
  CHECK(rows[1].max_beta() < rows[0].max_beta());
  CHECK(relative_error(rows[1].energies[2], 4.0 * kRootPi) < 0.03);

  std::ostringstream csv;
  write_csv(csv, std::span<const SequenceDiagnostics>(rows));
  CHECK(csv.str().rfind("idx,E1,E2,E3,max_beta,gamma0,gamma1,center_k,spread_k\n16,", 0) == 0);
}

TEST_CASE("multisolitons show no log|a| concentration") {
  const SpatialGrid grid;
  const std::vector<GridFunction> seq{eval_multisoliton(SolitonConfig({1.5, 0.5}, {0.0, 2.0}), grid)};
  const auto rows = point_mass_diagnostics(seq);
  for (double v : rows[0].profile.log_abs_a) CHECK(std::abs(v) < 1e-6);
  REQUIRE(rows[0].bound_betas.size() == 2);
  CHECK(std::abs(rows[0].max_beta() - 1.5) < 1e-8);
}

TEST_CASE("repeated values are split one copy per group") {
  MinimizerReport r;
  r.betas = {{2.0, 1}, {1.5, 3}, {0.5, 2}};
  const auto groups = split_into_groups(r);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0] == std::vector<double>{2.0, 1.5, 0.5});
  CHECK(groups[1] == std::vector<double>{1.5, 0.5});
  CHECK(groups[2] == std::vector<double>{1.5});
}

TEST_CASE("gas sequence approaches the relaxed minimum") {
  const ConstraintVector e{24.0, -100.0};
  const auto relaxed = relaxed_minimize(e, 4);
  const auto seq = gas_sequence(e, 4, 80.0, 2);
  REQUIRE(seq.size() == 2);
  CHECK(seq[1].separation == 160.0);
  for (const auto& el : seq) {
    CHECK(relative_error(eval_energy(1, el.u), e[0]) < 1e-9);
    CHECK(relative_error(eval_energy(2, el.u), e[1]) < 1e-9);
    CHECK(std::abs(eval_energy(3, el.u) - relaxed.C) < 1e-3);
    // each element is a sum of honest multisolitons, so it never beats the relaxed value by more than rounding
    CHECK(eval_energy(3, el.u) > relaxed.C - 1e-8 * relaxed.C);
  }
  CHECK_THROWS_AS(gas_sequence({24.0, -300.0}, 4, 80.0, 1), NotInMnn);
}

TEST_CASE("two copies of one soliton double the energies") {
  MinimizerReport r;
  r.betas = {{1.0, 2}};
  const auto groups = split_into_groups(r);
  REQUIRE(groups.size() == 2);
  const SpatialGrid grid(80.0, 4096);
  const std::vector<SolitonConfig> configs{SolitonConfig(groups[0], {0.0}), SolitonConfig(groups[1], {0.0})};
  const std::vector<double> offsets{-40.0, 40.0};
  const auto u = superpose(configs, offsets, grid);
  const auto single = constraints_of_betas(std::vector<double>{1.0}, 3);
  for (int m = 1; m <= 3; ++m) CHECK(relative_error(eval_energy(m, u), 2.0 * single[m - 1]) < 1e-6);
}

TEST_CASE("degenerate gas sequence is a single multisoliton") {
  const auto e = constraints_of_betas(std::vector<double>{2.0, 1.0}, 2);
  const auto seq = gas_sequence(e, 2, 50.0, 2);
  CHECK(seq[0].groups.size() == 1);
  CHECK(kdvlab::testing::sup_distance(seq[0].u, seq[1].u) < 1e-12);
}

TEST_CASE("molecular decomposition") {
  const SpatialGrid grid(120.0, 4096);
  const std::vector<SolitonConfig> one{SolitonConfig({2.0, 1.0}, {0.0, 1.0})};
  const std::vector<double> zero{0.0};
  CHECK(molecular_residual(one, zero, 2, grid) < 1e-8);

  const std::vector<SolitonConfig> split{SolitonConfig({2.0}, {0.0}), SolitonConfig({1.0}, {0.0})};
  double previous = 1.0;
  for (double s : {20.0, 40.0, 80.0}) {
    const std::vector<double> offsets{-s, s};
    const double r = molecular_residual(split, offsets, 2, grid);
    CHECK(r < 1e-2);
    CHECK(r <= std::max(previous, 1e-9));
    previous = r;
  }
  const std::vector<SolitonConfig> clash{SolitonConfig({1.0}, {0.0}), SolitonConfig({1.0}, {0.0})};
  const std::vector<double> offsets{-20.0, 20.0};
  CHECK_THROWS_AS(molecular_residual(clash, offsets, 1, grid), std::invalid_argument);
}

TEST_CASE("phase diagram") {
  const std::array<double, 2> e1{0.0, 10.0}, e2{-30.0, 5.0};
  const auto d = phase_diagram_sample(e1, e2, 64);
  REQUIRE(d.labels.size() == 64 * 64);
  CHECK(d.e1.front() > 0.0);
  CHECK(d.e1.back() == 10.0);
  CHECK(d.e2.front() == -30.0);
  CHECK(d.e2.back() == 5.0);
  for (std::size_t i = 0; i < d.e1.size(); ++i) {
    const double bound = single_soliton_bound(d.e1[i]);
    int previous_degree = 1 << 30;
    for (std::size_t j = 0; j < d.e2.size(); ++j) {
      const auto& label = d.at(i, j);
      if (d.e2[j] >= 0.0) CHECK(label.tag == Region::PointMass);
      else if (d.e2[j] < -bound) CHECK(label.tag == Region::Infeasible);
      else CHECK(label.tag != Region::Infeasible);
      if (label.tag == Region::Gas) {
        // e2 increases with j, so |e2| decreases and N_min may only grow
        CHECK(label.degree >= (previous_degree == 1 << 30 ? 0 : previous_degree));
        previous_degree = label.degree;
      }
    }
  }
  CHECK_THROWS_AS(phase_diagram_sample(e1, e2, 513), std::invalid_argument);

  std::ostringstream csv;
  write_csv(csv, phase_diagram_sample(e1, e2, 2));
  const auto text = csv.str();
  CHECK(text.rfind("e1,e2,region,N_min\n", 0) == 0);
  CHECK(text.find(",PointMass,\n") != std::string::npos);
}
