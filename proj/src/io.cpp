#include "kdvlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <stdexcept>

namespace kdvlab {

namespace {

template <class T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

template <class T>
void read_optional(const Json& j, const char* key, T& into) {
  if (j.contains(key)) into = get<T>(j, key);
}

std::size_t read_count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = get<std::int64_t>(j, key);
  if (v < 1) throw std::invalid_argument(std::string("\"") + key + "\" must be positive");
  return static_cast<std::size_t>(v);
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " must be a JSON object");
}

RegionLabel parse_region(const std::string& text) {
  static const std::regex pattern(R"((InteriorMnn|BoundaryMnn|Gas|PointMass|Infeasible|Origin)(?:\((>=)?(\d+)\))?)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) throw std::invalid_argument("unknown region \"" + text + "\"");
  RegionLabel label;
  const std::string name = m[1];
  if (name == "InteriorMnn") label.tag = Region::InteriorMnn;
  else if (name == "BoundaryMnn") label.tag = Region::BoundaryMnn;
  else if (name == "Gas") label.tag = Region::Gas;
  else if (name == "PointMass") label.tag = Region::PointMass;
  else if (name == "Infeasible") label.tag = Region::Infeasible;
  else label.tag = Region::Origin;
  label.degree_is_lower_bound = m[2].matched;
  if (m[3].matched) label.degree = std::stoi(m[3]);
  return label;
}

}  // namespace

Json to_json(const SolitonConfig& cfg) { return {{"betas", cfg.betas()}, {"shifts", cfg.shifts()}}; }

SolitonConfig soliton_config_from_json(const Json& j) {
  require_object(j, "soliton config");
  return {get<std::vector<double>>(j, "betas"), get<std::vector<double>>(j, "shifts")};
}

Json to_json(const DensityPolynomial& p) {
  Json terms = Json::array();
  for (const auto& [orders, coeff] : p.terms())
    terms.push_back({{"coeff_num", coeff.numerator()}, {"coeff_den", coeff.denominator()}, {"orders", orders}});
  return {{"terms", terms}};
}

DensityPolynomial density_from_json(const Json& j) {
  require_object(j, "density");
  DensityPolynomial p;
  const auto terms = get<Json>(j, "terms");
  if (!terms.is_array()) throw std::invalid_argument("\"terms\" must be an array");
  for (const auto& t : terms) {
    require_object(t, "term");
    const auto den = get<std::int64_t>(t, "coeff_den");
    if (den == 0) throw std::invalid_argument("zero denominator");
    auto orders = get<Orders>(t, "orders");
    for (int a : orders)
      if (a < 0) throw std::invalid_argument("negative derivative order");
    std::sort(orders.begin(), orders.end());
    p.add_term(Rational(get<std::int64_t>(t, "coeff_num"), den), orders);
  }
  return p;
}

Json to_json(const MinimizerReport& report) {
  Json betas = Json::array();
  for (const auto& b : report.betas) betas.push_back({{"value", b.value}, {"mult", b.mult}});
  return {{"betas", betas},
          {"C", report.C},
          {"lambda", report.lambda},
          {"region", report.region.to_string()},
          {"n", report.n},
          {"one_sided_gradient", report.one_sided_gradient}};
}

MinimizerReport minimizer_report_from_json(const Json& j) {
  require_object(j, "minimizer report");
  MinimizerReport r;
  for (const auto& b : get<Json>(j, "betas")) {
    require_object(b, "beta entry");
    r.betas.push_back({get<double>(b, "value"), get<int>(b, "mult")});
    if (r.betas.back().mult < 1) throw std::invalid_argument("multiplicity must be positive");
  }
  for (std::size_t i = 1; i < r.betas.size(); ++i)
    if (!(r.betas[i].value < r.betas[i - 1].value)) throw std::invalid_argument("betas must be strictly decreasing");
  r.C = get<double>(j, "C");
  r.lambda = get<std::vector<double>>(j, "lambda");
  r.region = parse_region(get<std::string>(j, "region"));
  if (r.region.tag == Region::InteriorMnn) r.region.degree = r.total_degree();
  r.n = static_cast<int>(r.lambda.size());
  read_optional(j, "n", r.n);
  read_optional(j, "one_sided_gradient", r.one_sided_gradient);
  return r;
}

Json bound_states_json(const std::vector<double>& betas) { return Json(betas); }

EvolutionSettings RunConfig::evolution() const {
  EvolutionSettings s;
  s.dt = dt;
  s.T = T;
  return s;
}

void RunConfig::validate() const {
  (void)grid();  // SpatialGrid validates L and M
  if (!(k_max > 0.0) || !std::isfinite(k_max)) throw std::invalid_argument("kmax must be positive");
  if (k_points < 16) throw std::invalid_argument("kpoints must be at least 16");
  evolution().validate();
  if (!params.is_object()) throw std::invalid_argument("\"params\" must be a JSON object");
}

Json to_json(const RunConfig& cfg) {
  return {{"L", cfg.L},   {"M", cfg.M}, {"kmax", cfg.k_max}, {"kpoints", cfg.k_points}, {"dt", cfg.dt},
          {"T", cfg.T},   {"seed", cfg.seed}, {"out", cfg.out}, {"params", cfg.params}};
}

RunConfig run_config_from_json(const Json& j, RunConfig cfg) {
  require_object(j, "config");
  read_optional(j, "L", cfg.L);
  cfg.M = read_count(j, "M", cfg.M);
  read_optional(j, "kmax", cfg.k_max);
  cfg.k_points = read_count(j, "kpoints", cfg.k_points);
  read_optional(j, "dt", cfg.dt);
  read_optional(j, "T", cfg.T);
  read_optional(j, "seed", cfg.seed);
  read_optional(j, "out", cfg.out);
  if (j.contains("params")) {
    const auto& p = j.at("params");
    require_object(p, "\"params\"");
    for (const auto& [k, v] : p.items()) cfg.params[k] = v;
  }
  return cfg;
}

EvolutionSettings evolution_settings_from_json(const Json& j, EvolutionSettings s) {
  require_object(j, "settings");
  read_optional(j, "dt", s.dt);
  read_optional(j, "T", s.T);
  s.validate();
  return s;
}

SpatialGrid grid_from_json(const Json& j, const SpatialGrid& defaults) {
  require_object(j, "settings");
  double L = defaults.half_width();
  read_optional(j, "L", L);
  return {L, read_count(j, "M", defaults.points())};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json error_json(const std::string& kind, const std::string& message) {
  return {{"error", kind}, {"message", message}};
}

}  // namespace kdvlab
