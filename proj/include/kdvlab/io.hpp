#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "kdvlab/constraint.hpp"
#include "kdvlab/density.hpp"
#include "kdvlab/evolve.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/scatter.hpp"
#include "kdvlab/soliton.hpp"

namespace kdvlab {

using Json = nlohmann::ordered_json;

// Every *_from_json reports malformed documents (missing keys, wrong types,
// invariant violations) as std::invalid_argument.

/// {"betas":[...],"shifts":[...]}
Json to_json(const SolitonConfig& cfg);
SolitonConfig soliton_config_from_json(const Json& j);

/// {"terms":[{"coeff_num":..,"coeff_den":..,"orders":[..]}, ...]}
Json to_json(const DensityPolynomial& p);
DensityPolynomial density_from_json(const Json& j);

/// {"betas":[{"value":..,"mult":..}],"C":..,"lambda":[..],"region":"..."} plus
/// "n" and "one_sided_gradient". The region string carries the degree, e.g.
/// "Gas(>=3)".
Json to_json(const MinimizerReport& report);
MinimizerReport minimizer_report_from_json(const Json& j);

/// Bound-state parameters as a plain array.
Json bound_states_json(const std::vector<double>& betas);

/// Shared numeric settings of a run. Missing keys keep their defaults.
struct RunConfig {
  double L = SpatialGrid::kDefaultHalfWidth;
  std::size_t M = SpatialGrid::kDefaultPoints;
  double k_max = 20.0;
  std::size_t k_points = 512;
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  /// Command-specific parameters.
  Json params = Json::object();

  SpatialGrid grid() const { return {L, M}; }
  FrequencyGrid frequencies() const { return make_frequency_grid(k_max, k_points); }
  EvolutionSettings evolution() const;
  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Keys "L","M","kmax","kpoints","dt","T","seed","out","params".
Json to_json(const RunConfig& cfg);
/// Reads the keys above over `defaults`.
RunConfig run_config_from_json(const Json& j, RunConfig defaults = {});

/// {"dt":..,"T":..,"L":..,"M":..} as (settings, grid).
EvolutionSettings evolution_settings_from_json(const Json& j, EvolutionSettings defaults = {});
SpatialGrid grid_from_json(const Json& j, const SpatialGrid& defaults = {});

/// Parses a JSON file; std::invalid_argument if unreadable or malformed.
Json read_json_file(const std::filesystem::path& path);
/// Writes `j` indented, with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

/// {"error":kind,"message":message}; kind is "validation" or "numerical".
Json error_json(const std::string& kind, const std::string& message);

}  // namespace kdvlab
