#include <trapflow/config.hpp>

#include <trapflow/errors.hpp>
#include <trapflow/poisson.hpp>
#include <trapflow/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace trapflow {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) schema_error(path + "." + item.key(), "unknown key");
}

double get_number(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) schema_error(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) schema_error(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) schema_error(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) schema_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

ProfileSpec parse_profile(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"profile", "value", "offset", "amplitude", "modes", "center", "width", "breaks",
              "values"});
  ProfileSpec p;
  p.kind = get_string(j, path, "profile", "constant");
  p.value = get_number(j, path, "value", 0.0);
  p.offset = get_number(j, path, "offset", 0.0);
  p.amplitude = get_number(j, path, "amplitude", 0.0);
  p.width = get_number(j, path, "width", 0.1);
  if (j.contains("modes")) {
    if (!j.at("modes").is_array()) schema_error(path + ".modes", "expected an array");
    for (const auto& m : j.at("modes")) p.modes.push_back(m.get<int>());
  }
  if (j.contains("center")) {
    if (!j.at("center").is_array()) schema_error(path + ".center", "expected an array");
    for (const auto& c : j.at("center")) p.center.push_back(c.get<double>());
  }
  if (j.contains("breaks")) {
    if (!j.at("breaks").is_array()) schema_error(path + ".breaks", "expected an array");
    for (const auto& b : j.at("breaks")) p.breaks.push_back(b.get<double>());
  }
  if (j.contains("values")) {
    if (!j.at("values").is_array()) schema_error(path + ".values", "expected an array");
    for (const auto& v : j.at("values")) p.values.push_back(v.get<double>());
  }
  static const std::set<std::string> kinds = {"constant", "cosine", "gaussian-bump",
                                              "piecewise", "inline-array"};
  if (!kinds.count(p.kind)) schema_error(path + ".profile", "unknown profile kind '" + p.kind + "'");
  return p;
}

} // namespace

std::vector<double> evaluate_profile(const Grid& grid, const ProfileSpec& spec,
                                     const std::string& path) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  std::vector<double> out(n, 0.0);
  if (spec.kind == "constant") {
    std::fill(out.begin(), out.end(), spec.value);
  } else if (spec.kind == "cosine") {
    std::vector<int> modes = spec.modes;
    if (modes.empty()) modes.assign(static_cast<std::size_t>(grid.dim), 1);
    if (static_cast<int>(modes.size()) != grid.dim)
      throw ValidationError(path + ".modes: expected one mode per axis");
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::cos(modes[0] * std::numbers::pi * grid.center_x[i]);
      if (grid.dim == 2) v *= std::cos(modes[1] * std::numbers::pi * grid.center_y[i]);
      out[i] = spec.offset + spec.amplitude * v;
    }
  } else if (spec.kind == "gaussian-bump") {
    std::vector<double> c = spec.center;
    if (c.empty()) c.assign(static_cast<std::size_t>(grid.dim), 0.5);
    if (static_cast<int>(c.size()) != grid.dim)
      throw ValidationError(path + ".center: expected one coordinate per axis");
    if (!(spec.width > 0.0)) throw ValidationError(path + ".width: must be > 0");
    for (std::size_t i = 0; i < n; ++i) {
      double q = (grid.center_x[i] - c[0]) * (grid.center_x[i] - c[0]);
      if (grid.dim == 2) q += (grid.center_y[i] - c[1]) * (grid.center_y[i] - c[1]);
      out[i] = spec.offset + spec.amplitude * std::exp(-0.5 * q / (spec.width * spec.width));
    }
  } else if (spec.kind == "piecewise") {
    if (spec.values.size() != spec.breaks.size() + 1)
      throw ValidationError(path + ": piecewise needs values.size() == breaks.size() + 1");
    if (!std::is_sorted(spec.breaks.begin(), spec.breaks.end()))
      throw ValidationError(path + ".breaks: must be ascending");
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.center_x[i];
      std::size_t seg = 0;
      while (seg < spec.breaks.size() && x >= spec.breaks[seg]) ++seg;
      out[i] = spec.values[seg];
    }
  } else if (spec.kind == "inline-array") {
    if (spec.values.size() != n)
      throw ValidationError(path + ".values: expected one entry per cell (" +
                            std::to_string(grid.num_cells) + ")");
    out = spec.values;
  } else {
    throw ValidationError(path + ": unknown profile kind '" + spec.kind + "'");
  }
  return out;
}

namespace {

ScenarioConfig parse_config_impl(const json& j);

} // namespace

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  try {
    return parse_config_impl(j);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
}

namespace {

ScenarioConfig parse_config_impl(const json& j) {
  require_object(j, "config");
  check_keys(j, "config",
             {"model", "grid", "fields", "initial", "stepper", "neutralize",
              "uniformity_bound", "equilibrium", "output"});

  ScenarioConfig cfg;

  if (j.contains("model")) {
    const json& m = j.at("model");
    require_object(m, "model");
    check_keys(m, "model", {"n0", "p0", "tau_n", "tau_p", "eps", "eps0", "lambda"});
    cfg.model.n0 = get_number(m, "model", "n0", cfg.model.n0);
    cfg.model.p0 = get_number(m, "model", "p0", cfg.model.p0);
    cfg.model.tau_n = get_number(m, "model", "tau_n", cfg.model.tau_n);
    cfg.model.tau_p = get_number(m, "model", "tau_p", cfg.model.tau_p);
    cfg.model.eps = get_number(m, "model", "eps", cfg.model.eps);
    cfg.model.eps0 = get_number(m, "model", "eps0", cfg.model.eps0);
    cfg.model.lambda = get_number(m, "model", "lambda", cfg.model.lambda);
  }
  cfg.model.validate();

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    require_object(g, "grid");
    check_keys(g, "grid", {"dim", "cells"});
    cfg.grid.dim = get_int(g, "grid", "dim", 1);
    if (g.contains("cells")) {
      if (!g.at("cells").is_array()) schema_error("grid.cells", "expected an array");
      cfg.grid.cells.clear();
      for (const auto& c : g.at("cells")) cfg.grid.cells.push_back(c.get<int>());
    } else {
      cfg.grid.cells.assign(static_cast<std::size_t>(cfg.grid.dim), 64);
    }
  }

  if (j.contains("fields")) {
    const json& f = j.at("fields");
    require_object(f, "fields");
    check_keys(f, "fields", {"doping", "v_n", "v_p"});
    if (f.contains("doping")) cfg.doping = parse_profile(f.at("doping"), "fields.doping");
    if (f.contains("v_n")) cfg.v_n = parse_profile(f.at("v_n"), "fields.v_n");
    if (f.contains("v_p")) cfg.v_p = parse_profile(f.at("v_p"), "fields.v_p");
  }

  if (j.contains("initial")) {
    const json& ini = j.at("initial");
    require_object(ini, "initial");
    check_keys(ini, "initial", {"kind", "seed", "amp_n", "amp_p", "amp_ntr", "n", "p", "n_tr"});
    cfg.initial.kind = get_string(ini, "initial", "kind", cfg.initial.kind);
    if (cfg.initial.kind != "equilibrium-perturbed" && cfg.initial.kind != "profiles")
      schema_error("initial.kind", "must be 'equilibrium-perturbed' or 'profiles'");
    if (ini.contains("seed")) cfg.initial.seed = ini.at("seed").get<std::uint64_t>();
    cfg.initial.amp_n = get_number(ini, "initial", "amp_n", cfg.initial.amp_n);
    cfg.initial.amp_p = get_number(ini, "initial", "amp_p", cfg.initial.amp_p);
    cfg.initial.amp_ntr = get_number(ini, "initial", "amp_ntr", cfg.initial.amp_ntr);
    if (ini.contains("n")) cfg.initial.n = parse_profile(ini.at("n"), "initial.n");
    if (ini.contains("p")) cfg.initial.p = parse_profile(ini.at("p"), "initial.p");
    if (ini.contains("n_tr")) cfg.initial.n_tr = parse_profile(ini.at("n_tr"), "initial.n_tr");
    if (cfg.initial.kind == "profiles" &&
        (!ini.contains("n") || !ini.contains("p") || !ini.contains("n_tr")))
      schema_error("initial", "kind 'profiles' requires n, p and n_tr profiles");
    if (!(cfg.initial.amp_n >= 0.0 && cfg.initial.amp_n < 1.0) ||
        !(cfg.initial.amp_p >= 0.0 && cfg.initial.amp_p < 1.0))
      throw ValidationError("initial.amp_n/amp_p must lie in [0,1) to keep densities positive");
    if (!(cfg.initial.amp_ntr >= 0.0 && cfg.initial.amp_ntr <= 1.0))
      throw ValidationError("initial.amp_ntr must lie in [0,1]");
  }

  if (j.contains("stepper")) {
    const json& s = j.at("stepper");
    require_object(s, "stepper");
    check_keys(s, "stepper",
               {"dt", "t_end", "gummel_iters", "sample_every", "tol_linear", "tol_scalar",
                "fit_window_fraction"});
    cfg.stepper.dt = get_number(s, "stepper", "dt", cfg.stepper.dt);
    cfg.stepper.t_end = get_number(s, "stepper", "t_end", cfg.stepper.t_end);
    cfg.stepper.gummel_iters = get_int(s, "stepper", "gummel_iters", cfg.stepper.gummel_iters);
    cfg.stepper.sample_every = get_int(s, "stepper", "sample_every", cfg.stepper.sample_every);
    cfg.stepper.tol_linear = get_number(s, "stepper", "tol_linear", cfg.stepper.tol_linear);
    cfg.stepper.tol_scalar = get_number(s, "stepper", "tol_scalar", cfg.stepper.tol_scalar);
    cfg.stepper.fit_window_fraction =
        get_number(s, "stepper", "fit_window_fraction", cfg.stepper.fit_window_fraction);
  }
  cfg.stepper.validate();

  cfg.neutralize = get_bool(j, "config", "neutralize", true);
  cfg.uniformity_bound = get_number(j, "config", "uniformity_bound", 3.0);
  if (!(cfg.uniformity_bound >= 1.0))
    throw ValidationError("uniformity_bound must be >= 1");

  if (j.contains("equilibrium")) {
    const json& e = j.at("equilibrium");
    require_object(e, "equilibrium");
    check_keys(e, "equilibrium", {"tol", "max_iters"});
    cfg.equilibrium.tol = get_number(e, "equilibrium", "tol", cfg.equilibrium.tol);
    cfg.equilibrium.max_iters = get_int(e, "equilibrium", "max_iters", cfg.equilibrium.max_iters);
    if (!(cfg.equilibrium.tol > 0.0) || cfg.equilibrium.max_iters < 1)
      throw ValidationError("equilibrium.tol must be > 0 and max_iters >= 1");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    require_object(o, "output");
    check_keys(o, "output", {"dir", "prefix"});
    cfg.output.dir = get_string(o, "output", "dir", cfg.output.dir);
    cfg.output.prefix = get_string(o, "output", "prefix", cfg.output.prefix);
  }

  return cfg;
}

} // namespace

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

FieldSetup materialize_fields(const ScenarioConfig& cfg) {
  FieldSetup fs;
  fs.params = cfg.model;
  fs.params.validate();
  fs.grid = build_grid(cfg.grid.dim, cfg.grid.cells);
  fs.fields = make_fields(fs.grid, evaluate_profile(fs.grid, cfg.doping, "fields.doping"),
                          evaluate_profile(fs.grid, cfg.v_n, "fields.v_n"),
                          evaluate_profile(fs.grid, cfg.v_p, "fields.v_p"));
  return fs;
}

Scenario materialize(const ScenarioConfig& cfg) {
  FieldSetup fs = materialize_fields(cfg);
  Scenario sc;
  sc.params = fs.params;
  sc.grid = std::move(fs.grid);
  sc.fields = std::move(fs.fields);

  State init;
  init.t = 0.0;
  if (cfg.initial.kind == "profiles") {
    init.n = evaluate_profile(sc.grid, cfg.initial.n, "initial.n");
    init.p = evaluate_profile(sc.grid, cfg.initial.p, "initial.p");
    init.n_tr = evaluate_profile(sc.grid, cfg.initial.n_tr, "initial.n_tr");
    for (double v : init.n)
      if (!(v >= 0.0)) throw ValidationError("initial.n must be nonnegative");
    for (double v : init.p)
      if (!(v >= 0.0)) throw ValidationError("initial.p must be nonnegative");
    for (double v : init.n_tr)
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("initial.n_tr must lie in [0,1]");
  } else {
    const EquilibriumState eq0 = solve_equilibrium(sc.grid, sc.fields, sc.params, cfg.equilibrium);
    Rng rng(cfg.initial.seed);
    const auto n = static_cast<std::size_t>(sc.grid.num_cells);
    init.n.resize(n);
    init.p.resize(n);
    init.n_tr.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      init.n[i] = eq0.n_inf[i] * (1.0 + cfg.initial.amp_n * rng.uniform(-1.0, 1.0));
      init.p[i] = eq0.p_inf[i] * (1.0 + cfg.initial.amp_p * rng.uniform(-1.0, 1.0));
      const double shifted = eq0.ntr_inf[i] + cfg.initial.amp_ntr * rng.uniform(-1.0, 1.0);
      init.n_tr[i] = std::clamp(shifted, 0.0, 1.0);
    }
  }

  // Charge neutrality: shift the doping by the constant that zeroes the mean
  // defect, so the pure-Neumann Poisson problem stays solvable along the run.
  std::vector<double> defect(init.n.size());
  for (std::size_t i = 0; i < defect.size(); ++i)
    defect[i] = init.n[i] - init.p[i] + sc.params.eps * init.n_tr[i] - sc.fields.doping[i];
  const double shift = cell_average(sc.grid, defect);
  if (cfg.neutralize && shift != 0.0) {
    std::vector<double> doping = sc.fields.doping;
    for (double& d : doping) d += shift;
    sc.fields = make_fields(sc.grid, std::move(doping), sc.fields.v_n, sc.fields.v_p);
    sc.doping_shift = shift;
  } else if (!cfg.neutralize) {
    double l1 = 0.0;
    for (double v : defect) l1 += std::abs(v);
    l1 *= sc.grid.cell_volume;
    if (std::abs(shift) > 1e-10 * (1.0 + l1))
      throw ChargeNeutralityViolation(
          "initial data violate charge neutrality (mean defect " + std::to_string(shift) +
          "); set neutralize: true or adjust the doping profile");
  }

  sc.eq = solve_equilibrium(sc.grid, sc.fields, sc.params, cfg.equilibrium);
  init.psi.assign(init.n.size(), 0.0);
  sc.initial = with_consistent_potential(std::move(init), sc.grid, sc.fields, sc.params,
                                         cfg.stepper.tol_linear);
  return sc;
}

} // namespace trapflow
