#include <doctest.h>

#include <filesystem>

#include "kdvlab/energy.hpp"
#include "kdvlab/io.hpp"

using namespace kdvlab;

TEST_CASE("soliton config round trip") {
  const SolitonConfig cfg({2.0, 0.1 + 0.2}, {-1.0 / 3.0, 5.0});
  const auto j = to_json(cfg);
  CHECK(j.dump() == R"({"betas":[2.0,0.30000000000000004],"shifts":[-0.3333333333333333,5.0]})");
  const auto back = soliton_config_from_json(Json::parse(j.dump()));
  CHECK(back.betas() == cfg.betas());
  CHECK(back.shifts() == cfg.shifts());

  CHECK_THROWS_AS(soliton_config_from_json(Json::parse(R"({"betas":[1,2],"shifts":[0,0]})")), std::invalid_argument);
  CHECK_THROWS_AS(soliton_config_from_json(Json::parse(R"({"betas":[1]})")), std::invalid_argument);
  CHECK_THROWS_AS(soliton_config_from_json(Json::parse(R"({"betas":"x","shifts":[]})")), std::invalid_argument);
  CHECK_THROWS_AS(soliton_config_from_json(Json::parse("[1,2]")), std::invalid_argument);
}

TEST_CASE("density dump") {
  const auto& e3 = canonical_energy_density(3);
  const auto j = to_json(e3);
  CHECK(j.dump() ==
        R"({"terms":[{"coeff_num":5,"coeff_den":2,"orders":[0,0,0,0]},)"
        R"({"coeff_num":5,"coeff_den":1,"orders":[0,1,1]},{"coeff_num":1,"coeff_den":2,"orders":[2,2]}]})");
  CHECK(density_from_json(j) == e3);
  CHECK_THROWS_AS(density_from_json(Json::parse(R"({"terms":[{"coeff_num":1,"coeff_den":0,"orders":[0]}]})")),
                  std::invalid_argument);
}

TEST_CASE("minimizer report round trip") {
  const auto report = solve_betas(constraints_of_betas(std::vector<double>{2.0, 1.0}, 2));
  const auto j = to_json(report);
  CHECK(j["region"] == "InteriorMnn");
  CHECK(j["betas"].size() == 2);
  const auto back = minimizer_report_from_json(Json::parse(j.dump()));
  CHECK(back.betas == report.betas);
  CHECK(back.C == report.C);
  CHECK(back.lambda == report.lambda);
  CHECK(back.region == report.region);
  CHECK(back.n == 2);

  const auto gas = relaxed_minimize({24.0, -100.0}, 4);
  const auto gas_back = minimizer_report_from_json(to_json(gas));
  CHECK(gas_back.region == gas.region);
  CHECK(gas_back.total_degree() == gas.total_degree());

  auto bad = j;
  bad["region"] = "Liquid";
  CHECK_THROWS_AS(minimizer_report_from_json(bad), std::invalid_argument);
  bad = j;
  bad["betas"][0]["mult"] = 0;
  CHECK_THROWS_AS(minimizer_report_from_json(bad), std::invalid_argument);
}

TEST_CASE("bound states as an array") {
  CHECK(bound_states_json({}).dump() == "[]");
  CHECK(bound_states_json({2.0, 1.0}).dump() == "[2.0,1.0]");
}

TEST_CASE("settings and run config") {
  const auto s = evolution_settings_from_json(Json::parse(R"({"dt":0.002,"T":3,"L":60,"M":4096})"));
  CHECK(s.dt == 0.002);
  CHECK(s.T == 3.0);
  CHECK(grid_from_json(Json::parse(R"({"dt":0.002,"L":60,"M":4096})")) == SpatialGrid(60.0, 4096));
  CHECK_THROWS_AS(evolution_settings_from_json(Json::parse(R"({"dt":-1})")), std::invalid_argument);
  CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"M":-4})")), std::invalid_argument);

  RunConfig cfg;
  cfg.M = 1024;
  cfg.seed = 7;
  cfg.params["e"] = {24.0, -211.2};
  const auto back = run_config_from_json(Json::parse(to_json(cfg).dump()));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.grid() == SpatialGrid(40.0, 1024));
  CHECK_NOTHROW(back.validate());
  cfg.k_max = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("files") {
  const auto path = std::filesystem::temp_directory_path() / "kdvlab_io_test.json";
  write_json_file(path, error_json("validation", "bad"));
  CHECK(read_json_file(path) == Json::parse(R"({"error":"validation","message":"bad"})"));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_json_file(path), std::invalid_argument);
}
