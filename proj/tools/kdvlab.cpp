// kdvlab: command-line front end. See README.md for the subcommands.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kdvlab/acceptance.hpp"
#include "kdvlab/energy.hpp"
#include "kdvlab/io.hpp"
#include "kdvlab/sequences.hpp"

namespace fs = std::filesystem;
using namespace kdvlab;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

template <class T>
T param_value(const Json& params, const std::string& key) {
  try {
    return params.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad value for parameter \"" + key + "\": " + e.what());
  }
}

// Command-line value if given, else the config file's, else the default. The
// resolved value is written back so the manifest records it.
template <class T>
void resolve(const CLI::Option* opt, Json& params, const std::string& key, T& var) {
  if (opt->count() == 0 && params.contains(key)) var = param_value<T>(params, key);
  params[key] = var;
}

template <class T>
void resolve(const CLI::Option* opt, Json& params, const std::string& key, std::optional<T>& var) {
  if (opt->count() == 0 && params.contains(key))
    var = params[key].is_null() ? std::nullopt : std::optional<T>(param_value<T>(params, key));
  params[key] = var ? Json(*var) : Json(nullptr);
}

std::array<double, 2> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) throw std::invalid_argument("");
    std::size_t used_lo = 0, used_hi = 0;
    const std::string lo = text.substr(0, dots), hi = text.substr(dots + 2);
    const double a = std::stod(lo, &used_lo), b = std::stod(hi, &used_hi);
    if (used_lo != lo.size() || used_hi != hi.size()) throw std::invalid_argument("");
    return {a, b};
  } catch (const std::exception&) {
    throw std::invalid_argument("range must look like LO..HI, got \"" + text + "\"");
  }
}

// "--e2 -30..5" would otherwise read -30..5 as a short option.
std::vector<std::string> join_negative_ranges(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) == 0 && a.find('=') == std::string::npos && i + 1 < args.size() &&
        args[i + 1].size() > 1 && args[i + 1][0] == '-' && args[i + 1].find("..") != std::string::npos) {
      out.push_back(a + "=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

struct Output {
  std::string name;
  std::string text;
};

// Where the profile of energy/scatter/evolve comes from.
struct ProfileSource {
  std::vector<double> betas, shifts;
  std::optional<std::string> input;   // x,value CSV
  std::optional<std::string> soliton; // SolitonConfig JSON
  CLI::Option *o_betas = nullptr, *o_shifts = nullptr, *o_input = nullptr, *o_soliton = nullptr;

  void add_to(CLI::App* cmd) {
    o_betas = cmd->add_option("--betas", betas, "Multisoliton amplitude parameters, strictly decreasing");
    o_shifts = cmd->add_option("--shifts", shifts, "Multisoliton shifts (default: all zero)");
    o_input = cmd->add_option("--input", input, "Profile CSV with header x,value");
    o_soliton = cmd->add_option("--soliton", soliton, "SolitonConfig JSON file");
  }

  void resolve_params(Json& params) {
    resolve(o_soliton, params, "soliton", soliton);
    if (soliton) {
      const auto cfg = soliton_config_from_json(read_json_file(*soliton));
      betas = cfg.betas();
      shifts = cfg.shifts();
    }
    resolve(o_betas, params, "betas", betas);
    if (shifts.empty() && !params.contains("shifts")) shifts.assign(betas.size(), 0.0);
    resolve(o_shifts, params, "shifts", shifts);
    resolve(o_input, params, "input", input);
    if (input && !betas.empty()) throw std::invalid_argument("give either --input or --betas, not both");
  }

  std::optional<SolitonConfig> config() const {
    if (input) return std::nullopt;
    return SolitonConfig(betas, shifts);
  }

  GridFunction profile(const SpatialGrid& grid) const {
    if (input) {
      std::ifstream in(*input);
      if (!in) throw std::invalid_argument("cannot open " + *input);
      return read_csv(in);
    }
    return eval_multisoliton(*config(), grid);
  }
};

std::string csv(const std::function<void(std::ostream&)>& write) {
  std::ostringstream out;
  out << std::setprecision(17);
  write(out);
  return out.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

class Cli {
 public:
  Cli() : app_("Multisoliton minimizers of KdV conserved quantities: experiments and checks", "kdvlab") {
    app_.require_subcommand(1);
    app_.fallthrough();
    o_L_ = app_.add_option("--grid-L", cfg_.L, "Half-width of the spatial interval [-L, L)")->capture_default_str();
    o_M_ = app_.add_option("--grid-M", cfg_.M, "Number of grid points")->capture_default_str();
    o_kmax_ = app_.add_option("--kmax", cfg_.k_max, "Largest scattering frequency")->capture_default_str();
    o_kpoints_ = app_.add_option("--kpoints", cfg_.k_points, "Number of scattering frequencies")->capture_default_str();
    o_dt_ = app_.add_option("--dt", cfg_.dt, "Time step")->capture_default_str();
    o_T_ = app_.add_option("--T", cfg_.T, "Final time")->capture_default_str();
    o_out_ = app_.add_option("--out", cfg_.out, "Write outputs and manifest.json into this directory");
    o_seed_ = app_.add_option("--seed", cfg_.seed, "Seed for randomized probes")->capture_default_str();
    app_.add_option("--config", config_path_, "JSON config (for example a manifest.json from an earlier run)");

    add_soliton();
    add_energy();
    add_scatter();
    add_solve();
    add_phase_diagram();
    add_evolve();
    add_stability();
    add_minseq();
    add_verify();
  }

  int run(int argc, char** argv) {
    auto args = join_negative_ranges(argc, argv);
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app_.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app_.exit(e);
    } catch (const CLI::ParseError& e) {
      return fail(kExitValidation, "validation", e.what());
    }
    try {
      const auto* cmd = app_.get_subcommands().front();
      prepare_config(cmd->get_name());
      const int code = commands_.at(cmd->get_name())();
      emit();
      return code;
    } catch (const std::invalid_argument& e) {
      return fail(kExitValidation, "validation", e.what());
    } catch (const NumericalError& e) {
      return fail(kExitNumerical, "numerical", e.what());
    } catch (const std::exception& e) {
      return fail(kExitNumerical, "numerical", e.what());
    }
  }

 private:
  CLI::App app_;
  RunConfig cfg_;
  std::string config_path_;
  std::string command_;
  CLI::Option *o_L_, *o_M_, *o_kmax_, *o_kpoints_, *o_dt_, *o_T_, *o_out_, *o_seed_;
  std::map<std::string, std::function<int()>> commands_;
  // first entry goes to stdout when --out is absent
  std::vector<Output> outputs_;

  static int fail(int code, const std::string& kind, const std::string& message) {
    std::cerr << error_json(kind, message).dump() << '\n';
    return code;
  }

  void prepare_config(const std::string& command) {
    command_ = command;
    if (config_path_.empty()) return;
    const auto file = read_json_file(config_path_);
    if (file.contains("command") && file["command"] != command)
      throw std::invalid_argument("config was written by \"" + file["command"].get<std::string>() + "\", not \"" +
                                  command + "\"");
    // command-line flags win over the file
    RunConfig from_file = run_config_from_json(file);
    const auto keep = [](const CLI::Option* o, auto& dst, const auto& src) {
      if (o->count() == 0) dst = src;
    };
    keep(o_L_, cfg_.L, from_file.L);
    keep(o_M_, cfg_.M, from_file.M);
    keep(o_kmax_, cfg_.k_max, from_file.k_max);
    keep(o_kpoints_, cfg_.k_points, from_file.k_points);
    keep(o_dt_, cfg_.dt, from_file.dt);
    keep(o_T_, cfg_.T, from_file.T);
    keep(o_out_, cfg_.out, from_file.out);
    keep(o_seed_, cfg_.seed, from_file.seed);
    cfg_.params = from_file.params;
  }

  void emit() {
    if (cfg_.out.empty()) {
      if (!outputs_.empty()) std::cout << outputs_.front().text;
      return;
    }
    const fs::path dir(cfg_.out);
    fs::create_directories(dir);
    for (const auto& o : outputs_) {
      std::ofstream f(dir / o.name);
      if (!f) throw std::invalid_argument("cannot write " + (dir / o.name).string());
      f << o.text;
    }
    Json manifest = {{"command", command_}};
    manifest.update(to_json(cfg_));
    write_json_file(dir / "manifest.json", manifest);
  }

  void add(const std::string& name, const std::function<int()>& body) { commands_[name] = body; }

  // soliton ------------------------------------------------------------------
  void add_soliton() {
    auto* cmd = app_.add_subcommand("soliton", "Sample a multisoliton profile (CSV x,value)");
    auto src = std::make_shared<ProfileSource>();
    src->add_to(cmd);
    add("soliton", [this, src] {
      src->resolve_params(cfg_.params);
      if (src->input) throw std::invalid_argument("soliton needs --betas or --soliton");
      cfg_.validate();
      const auto u = src->profile(cfg_.grid());
      outputs_.push_back({"profile.csv", csv([&](std::ostream& o) { write_csv(o, u); })});
      outputs_.push_back({"soliton.json", dump(to_json(*src->config()))});
      return 0;
    });
  }

  // energy -------------------------------------------------------------------
  void add_energy() {
    auto* cmd = app_.add_subcommand("energy", "Table of E_1..E_n for a profile (CSV n,E)");
    auto src = std::make_shared<ProfileSource>();
    src->add_to(cmd);
    auto n = std::make_shared<int>(3);
    auto* o_n = cmd->add_option("--n", *n, "Largest energy index (at most 6)")->capture_default_str();
    add("energy", [this, src, n, o_n] {
      src->resolve_params(cfg_.params);
      resolve(o_n, cfg_.params, "n", *n);
      if (*n < 1 || *n > kMaxEnergyIndex) throw std::invalid_argument("--n must lie in [1, 6]");
      cfg_.validate();
      const auto u = src->profile(cfg_.grid());
      outputs_.push_back({"energies.csv", csv([&](std::ostream& o) {
                            o << "n,E\n";
                            for (int m = 1; m <= *n; ++m) o << m << ',' << eval_energy(m, u) << '\n';
                          })});
      return 0;
    });
  }

  // scatter ------------------------------------------------------------------
  void add_scatter() {
    auto* cmd = app_.add_subcommand("scatter", "a(k), bound states and trace-formula residuals");
    auto src = std::make_shared<ProfileSource>();
    src->add_to(cmd);
    auto n = std::make_shared<int>(3);
    auto* o_n = cmd->add_option("--n", *n, "Trace formulas up to this index")->capture_default_str();
    add("scatter", [this, src, n, o_n] {
      src->resolve_params(cfg_.params);
      resolve(o_n, cfg_.params, "n", *n);
      if (*n < 1 || *n > kMaxEnergyIndex) throw std::invalid_argument("--n must lie in [1, 6]");
      cfg_.validate();
      const auto u = src->profile(cfg_.grid());
      auto sample = transmission_reciprocal(u, cfg_.frequencies());
      const auto trace = trace_residuals(u, *n, cfg_.frequencies());
      sample.bound_betas = trace.bound_betas;
      Json rows = Json::array();
      for (int m = 1; m <= *n; ++m) {
        const auto i = static_cast<std::size_t>(m - 1);
        rows.push_back({{"n", m},
                        {"energy", trace.energies[i]},
                        {"trace", trace.trace_values[i]},
                        {"residual", trace.residuals[i]},
                        {"relative_residual", trace.relative_residual(i)}});
      }
      const Json summary = {{"bound_states", bound_states_json(trace.bound_betas)},
                            {"trace", rows},
                            {"tail_warning", trace.moments.tail_warning}};
      outputs_.push_back({"summary.json", dump(summary)});
      outputs_.push_back({"scatter.csv", csv([&](std::ostream& o) { write_csv(o, sample); })});
      outputs_.push_back({"bound_states.json", bound_states_json(trace.bound_betas).dump() + "\n"});
      return 0;
    });
  }

  // solve --------------------------------------------------------------------
  void add_solve() {
    auto* cmd = app_.add_subcommand("solve", "Constraint values e -> MinimizerReport JSON");
    auto e = std::make_shared<std::vector<double>>();
    auto n = std::make_shared<std::optional<int>>();
    auto N = std::make_shared<std::optional<int>>();
    auto* o_e = cmd->add_option("--e", *e, "Constraint values E_1..E_n");
    auto* o_n = cmd->add_option("--n", *n, "Number of constraints (must match --e)");
    auto* o_N = cmd->add_option("--N", *N, "Total degree for the relaxed problem (default: the smallest that works)");
    add("solve", [this, e, n, N, o_e, o_n, o_N] {
      resolve(o_e, cfg_.params, "e", *e);
      resolve(o_n, cfg_.params, "n", *n);
      resolve(o_N, cfg_.params, "N", *N);
      if (e->empty()) throw std::invalid_argument("--e is required");
      if (*n && **n != static_cast<int>(e->size())) throw std::invalid_argument("--n does not match the length of --e");
      MinimizerReport report;
      if (*N) {
        report = relaxed_minimize(*e, **N);
      } else {
        try {
          report = solve_betas(*e);
        } catch (const NotInMnn&) {
          const auto label = classify(*e);
          if (label.tag != Region::Gas || label.degree_is_lower_bound) throw;
          report = relaxed_minimize(*e, label.degree);
        }
      }
      outputs_.push_back({"report.json", dump(to_json(report))});
      return 0;
    });
  }

  // phase-diagram ------------------------------------------------------------
  void add_phase_diagram() {
    auto* cmd = app_.add_subcommand("phase-diagram", "Region labels on an (e1, e2) lattice (CSV e1,e2,region,N_min)");
    auto e1 = std::make_shared<std::string>("0..10");
    auto e2 = std::make_shared<std::string>("-30..5");
    auto res = std::make_shared<int>(128);
    auto* o_e1 = cmd->add_option("--e1", *e1, "E_1 range LO..HI (LO excluded)")->capture_default_str();
    auto* o_e2 = cmd->add_option("--e2", *e2, "E_2 range LO..HI")->capture_default_str();
    auto* o_res = cmd->add_option("--res", *res, "Lattice points per axis (at most 512)")->capture_default_str();
    add("phase-diagram", [this, e1, e2, res, o_e1, o_e2, o_res] {
      resolve(o_e1, cfg_.params, "e1", *e1);
      resolve(o_e2, cfg_.params, "e2", *e2);
      resolve(o_res, cfg_.params, "res", *res);
      const auto r1 = parse_range(*e1), r2 = parse_range(*e2);
      const auto d = phase_diagram_sample(r1, r2, *res);
      outputs_.push_back({"phase_diagram.csv", csv([&](std::ostream& o) { write_csv(o, d); })});
      return 0;
    });
  }

  // evolve -------------------------------------------------------------------
  void add_evolve() {
    auto* cmd = app_.add_subcommand("evolve", "KdV evolution: snapshots and conservation drift");
    auto src = std::make_shared<ProfileSource>();
    src->add_to(cmd);
    auto snapshots = std::make_shared<int>(5);
    auto frame = std::make_shared<std::optional<double>>();
    auto* o_snap = cmd->add_option("--snapshots", *snapshots, "Number of saved times, t = 0 and T included")
                       ->capture_default_str();
    auto* o_frame = cmd->add_option("--frame-speed", *frame, "Evolve in the frame x - V t");
    add("evolve", [this, src, snapshots, frame, o_snap, o_frame] {
      src->resolve_params(cfg_.params);
      resolve(o_snap, cfg_.params, "snapshots", *snapshots);
      resolve(o_frame, cfg_.params, "frame_speed", *frame);
      if (*snapshots < 2) throw std::invalid_argument("--snapshots must be at least 2");
      cfg_.validate();
      auto settings = cfg_.evolution();
      settings.frame_speed = *frame;
      const auto grid = cfg_.grid();
      if (const auto sc = src->config()) check_seam_clearance(*sc, grid, settings);
      const auto u0 = src->profile(grid);
      const auto traj = evolve_trajectory(u0, settings, static_cast<std::size_t>(*snapshots));

      constexpr int kDriftIndices = 3;
      std::vector<double> initial, drift(kDriftIndices, 0.0);
      for (int m = 1; m <= kDriftIndices; ++m) initial.push_back(eval_energy(m, u0));
      for (const auto& u : traj.states)
        for (int m = 1; m <= kDriftIndices; ++m) {
          const auto i = static_cast<std::size_t>(m - 1);
          drift[i] = std::max(drift[i], std::abs(eval_energy(m, u) - initial[i]) / std::max(1.0, std::abs(initial[i])));
        }
      outputs_.push_back({"drift.csv", csv([&](std::ostream& o) {
                            o << "n,E_initial,drift\n";
                            for (int m = 1; m <= kDriftIndices; ++m)
                              o << m << ',' << initial[m - 1] << ',' << drift[m - 1] << '\n';
                          })});
      outputs_.push_back({"snapshots.csv", csv([&](std::ostream& o) {
                            o << "t,x,u\n";
                            for (std::size_t s = 0; s < traj.states.size(); ++s)
                              for (std::size_t j = 0; j < grid.points(); ++j)
                                o << traj.times[s] << ',' << grid.node(j) << ',' << traj.states[s][j] << '\n';
                          })});
      return 0;
    });
  }

  // stability ----------------------------------------------------------------
  void add_stability() {
    auto* cmd = app_.add_subcommand("stability", "Orbital stability trace (CSV t,distance)");
    auto betas = std::make_shared<std::vector<double>>(std::vector<double>{1.0});
    auto delta = std::make_shared<double>(1e-3);
    auto n = std::make_shared<int>(1);
    auto* o_b = cmd->add_option("--betas", *betas, "Multisoliton amplitude parameters")->capture_default_str();
    auto* o_d = cmd->add_option("--delta", *delta, "H^n size of the initial perturbation")->capture_default_str();
    auto* o_n = cmd->add_option("--n", *n, "Sobolev index of the distance")->capture_default_str();
    add("stability", [this, betas, delta, n, o_b, o_d, o_n] {
      resolve(o_b, cfg_.params, "betas", *betas);
      resolve(o_d, cfg_.params, "delta", *delta);
      resolve(o_n, cfg_.params, "n", *n);
      cfg_.validate();
      const auto trace = orbital_stability_experiment(*betas, *delta, cfg_.evolution(), *n, cfg_.grid());
      outputs_.push_back({"stability.csv", csv([&](std::ostream& o) { write_csv(o, trace); })});
      return 0;
    });
  }

  // minseq -------------------------------------------------------------------
  void add_minseq() {
    auto* cmd = app_.add_subcommand("minseq", "Minimizing-sequence diagnostics (gas or point-mass)");
    auto kind = std::make_shared<std::string>("gas");
    auto e = std::make_shared<std::vector<double>>(std::vector<double>{24.0, -100.0});
    auto N = std::make_shared<std::optional<int>>();
    auto separation = std::make_shared<double>(80.0);
    auto count = std::make_shared<int>(3);
    auto c = std::make_shared<double>(1.0);
    auto k = std::make_shared<double>(1.0);
    auto indices = std::make_shared<std::vector<int>>(std::vector<int>{16, 64, 256});
    auto* o_kind = cmd->add_option("--kind", *kind, "gas or point-mass")
                       ->check(CLI::IsMember({"gas", "point-mass"}))
                       ->capture_default_str();
    auto* o_e = cmd->add_option("--e", *e, "Gas: constraint values")->capture_default_str();
    auto* o_N = cmd->add_option("--N", *N, "Gas: total degree (default: N_min)");
    auto* o_sep = cmd->add_option("--separation", *separation, "Gas: first separation")->capture_default_str();
    auto* o_count = cmd->add_option("--count", *count, "Gas: number of elements")->capture_default_str();
    auto* o_c = cmd->add_option("--c", *c, "Point mass: amplitude c")->capture_default_str();
    auto* o_k = cmd->add_option("--k", *k, "Point mass: frequency k")->capture_default_str();
    auto* o_idx = cmd->add_option("--indices", *indices, "Point mass: sequence indices")->capture_default_str();
    add("minseq", [=, this] {
      resolve(o_kind, cfg_.params, "kind", *kind);
      std::vector<GridFunction> seq;
      std::vector<int> labels;
      if (*kind == "gas") {
        resolve(o_e, cfg_.params, "e", *e);
        resolve(o_N, cfg_.params, "N", *N);
        resolve(o_sep, cfg_.params, "separation", *separation);
        resolve(o_count, cfg_.params, "count", *count);
        int degree = 0;
        if (*N) {
          degree = **N;
        } else {
          const auto label = classify(*e);
          if (label.tag != Region::Gas && label.tag != Region::InteriorMnn && label.tag != Region::BoundaryMnn)
            throw std::invalid_argument("e is in region " + label.to_string() + ", which has no gas sequence");
          if (label.degree_is_lower_bound) throw NotInMnn("no gas degree found for e");
          degree = label.degree;
        }
        const auto report = relaxed_minimize(*e, degree);
        for (auto& el : gas_sequence(*e, degree, *separation, *count)) {
          labels.push_back(static_cast<int>(seq.size()));
          seq.push_back(std::move(el.u));
        }
        outputs_.push_back({"diagnostics.csv", ""});
        outputs_.push_back({"relaxed.json", dump(to_json(report))});
      } else {
        resolve(o_c, cfg_.params, "c", *c);
        resolve(o_k, cfg_.params, "k", *k);
        resolve(o_idx, cfg_.params, "indices", *indices);
        for (int i : *indices) seq.push_back(wigner_von_neumann(*c, *k, i, wigner_von_neumann_grid(i)));
        labels = *indices;
        outputs_.push_back({"diagnostics.csv", ""});
      }
      const auto rows = point_mass_diagnostics(seq, labels);
      outputs_.front().text = csv([&](std::ostream& o) { write_csv(o, std::span<const SequenceDiagnostics>(rows)); });
      return 0;
    });
  }

  // verify -------------------------------------------------------------------
  void add_verify() {
    auto* cmd = app_.add_subcommand("verify", "Run the acceptance suite and print a pass/fail table");
    auto ids = std::make_shared<std::vector<int>>();
    auto* o_ids = cmd->add_option("--criteria", *ids, "Criterion numbers to run (default: all)");
    add("verify", [this, ids, o_ids] {
      resolve(o_ids, cfg_.params, "criteria", *ids);
      const auto results = run_acceptance(cfg_.seed, *ids);
      std::ostringstream table;
      write_table(table, results);
      outputs_.push_back({"verify.txt", table.str()});
      // the table goes to the terminal even with --out
      if (!cfg_.out.empty()) std::cout << table.str();
      return all_passed(results) ? 0 : kExitNumerical;
    });
  }
};

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  return cli.run(argc, argv);
}
