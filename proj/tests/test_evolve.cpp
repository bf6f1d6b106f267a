#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kdvlab/energy.hpp"
#include "kdvlab/errors.hpp"
#include "kdvlab/evolve.hpp"

using namespace kdvlab;

namespace {

EvolutionSettings settings(double dt, double T) {
  EvolutionSettings s;
  s.dt = dt;
  s.T = T;
  return s;
}

GridFunction bump(const SpatialGrid& grid, double amplitude, double at = 0.0) {
  return GridFunction::sample(grid, [=](double x) { return amplitude * std::exp(-(x - at) * (x - at)); });
}

double h1_error_one_soliton(double dt) {
  const SpatialGrid grid;
  const SolitonConfig cfg({1.0}, {0.0});
  const auto u = evolve_kdv(cfg, grid, settings(dt, 1.0));
  return sobolev_norm(u - eval_multisoliton(evolve_config(cfg, 1.0), grid), 1);
}

}  // namespace

TEST_CASE("settings validation") {
  CHECK_THROWS_AS(settings(0.0, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(settings(1e-3, -1.0).validate(), std::invalid_argument);
  auto s = settings(1e-3, 1.0);
  s.dealias_fraction = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK(settings(0.3, 1.0).step_count() == 4);
  CHECK(settings(0.25, 1.0).step_count() == 4);
  CHECK(EvolutionSettings::explicit_step_bound(SpatialGrid()) < 1e-4);
}

TEST_CASE("zero data stays zero") {
  const SpatialGrid grid;
  const auto u = evolve_kdv(GridFunction(grid), settings(1e-2, 1.0));
  CHECK(u.max_abs() == 0.0);
  for (double d : conservation_drift(GridFunction(grid), settings(1e-2, 1.0), 3)) CHECK(d == 0.0);
}

TEST_CASE("one soliton travels at speed 4 beta^2") {
  CHECK(h1_error_one_soliton(1e-3) < 1e-6);
  // fourth order until the spatial floor
  const double coarse = h1_error_one_soliton(1e-2), fine = h1_error_one_soliton(5e-3);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("two-soliton collision") {
  const SpatialGrid grid;
  const SolitonConfig cfg({2.0, 1.0}, {-5.0, 5.0});
  const auto u = evolve_kdv(cfg, grid, settings(1e-4, 2.0));
  CHECK(sobolev_norm(u - eval_multisoliton(evolve_config(cfg, 2.0), grid), 1) < 1e-5);
}

TEST_CASE("moving frame is a translation of the lab frame") {
  const SpatialGrid grid;
  const auto u0 = eval_multisoliton(SolitonConfig({1.0}, {0.0}), grid);
  auto moving = settings(1e-3, 0.5);
  moving.frame_speed = 4.0;
  const auto lab = evolve_kdv(u0, settings(1e-3, 0.5));
  const auto frame = evolve_kdv(u0, moving);
  CHECK(sobolev_norm(frame - fourier_shift(lab, 2.0), 1) < 1e-6);
  // co-moving with the soliton: it stays put
  CHECK(sobolev_norm(frame - u0, 1) < 1e-6);
}

TEST_CASE("seam clearance") {
  const SpatialGrid grid;
  CHECK_THROWS_AS(evolve_kdv(SolitonConfig({2.0}, {0.0}), grid, settings(1e-3, 2.5)), std::invalid_argument);
  CHECK_THROWS_AS(check_seam_clearance(SolitonConfig({1.0}, {-35.0}), grid, settings(1e-3, 0.0)),
                  std::invalid_argument);
  CHECK_NOTHROW(check_seam_clearance(SolitonConfig({2.0, 1.0}, {-5.0, 5.0}), grid, settings(1e-3, 2.0)));
}

TEST_CASE("conserved quantities") {
  const SpatialGrid grid;
  const auto soliton = eval_multisoliton(SolitonConfig({1.0}, {0.0}), grid);
  for (double d : conservation_drift(soliton, settings(1e-3, 1.0), 3)) CHECK(d < 1e-7);
  for (double d : conservation_drift(bump(grid, 0.5), settings(1e-3, 1.0), 3)) CHECK(d < 1e-6);
  // E_1 is quadratic; its drift is time-stepping error only
  for (double dt : {5e-4, 2.5e-4}) CHECK(conservation_drift(soliton, settings(dt, 1.0), 1)[0] < 1e-10);
}

TEST_CASE("blow-up guard") {
  const SpatialGrid grid(40.0, 256);
  auto s = settings(0.5, 5.0);
  s.dealias_fraction = 1.0;
  CHECK_THROWS_AS(evolve_kdv(bump(grid, -40.0), s), NumericalError);
}

TEST_CASE("distance to the multisoliton manifold") {
  const SpatialGrid grid;
  const std::vector<double> one{1.0};
  const auto member = eval_multisoliton(SolitonConfig(one, {3.0}), grid);
  const auto fit = manifold_distance(member, one, 1);
  CHECK(fit.distance < 1e-8);
  CHECK(std::abs(fit.shifts[0] - 3.0) < 1e-8);

  const auto noise = 1e-3 * bump(grid, 1.0, 1.5);
  const auto near = manifold_distance(eval_multisoliton(SolitonConfig(one, {0.0}), grid) + noise, one, 1);
  CHECK(near.distance > 0.0);
  CHECK(near.distance <= sobolev_norm(noise, 1) + 1e-12);
  CHECK(near.distance <= 1e-2);

  // mid-collision, where the two troughs have merged
  const SolitonConfig pair({2.0, 1.0}, {-5.0, 5.0});
  const auto mid = evolve_config(pair, 0.7);
  const auto overlap = manifold_distance(eval_multisoliton(mid, grid), pair.betas(), 2);
  CHECK(overlap.distance < 1e-6);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(overlap.shifts[j] - mid.shifts()[j]) < 1e-6);

  CHECK_THROWS_AS(manifold_distance(member, std::vector<double>{1.0, 2.0}, 1), std::invalid_argument);
}

TEST_CASE("orbital stability") {
  const SpatialGrid grid;
  const std::vector<double> one{1.0};
  const auto s = settings(1e-3, 4.0);
  const auto exact = orbital_stability_experiment(one, 0.0, s, 1, grid);
  CHECK(exact.times.size() == 32);
  CHECK(exact.sup_distance < 1e-6);
  const auto small = orbital_stability_experiment(one, 1e-3, s, 1, grid);
  const auto large = orbital_stability_experiment(one, 1e-2, s, 1, grid);
  CHECK(small.sup_distance > 0.0);
  CHECK(large.sup_distance / small.sup_distance <= 15.0);
  CHECK(large.sup_distance == doctest::Approx(*std::max_element(large.distances.begin(), large.distances.end())));

  std::ostringstream csv;
  write_csv(csv, small);
  CHECK(csv.str().rfind("t,distance\n0,", 0) == 0);
}

TEST_CASE("collision shifts meet at half time") {
  EvolutionSettings s = settings(1e-3, 10.0);
  const std::vector<double> betas{2.0, 1.0};
  const auto c = collision_shifts(betas, s);
  CHECK(c[0] == doctest::Approx(-30.0));
  CHECK(c[1] == doctest::Approx(30.0));
}
