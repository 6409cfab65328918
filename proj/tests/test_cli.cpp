#include <doctest.h>

#include <trapflow/commands.hpp>
#include <trapflow/config.hpp>
#include <trapflow/errors.hpp>
#include <trapflow/output.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace trapflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("trapflow_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p.string();
}

const char* kScenario = R"({
  "model": {"eps": 1e-2},
  "grid": {"dim": 1, "cells": [48]},
  "fields": {
    "doping": {"profile": "cosine", "amplitude": 0.3, "modes": [1]},
    "v_n": {"profile": "cosine", "amplitude": 0.2, "modes": [1]},
    "v_p": {"profile": "cosine", "amplitude": 0.15, "modes": [2]}
  },
  "initial": {"kind": "equilibrium-perturbed", "seed": 42, "amp_n": 0.3, "amp_p": 0.3, "amp_ntr": 0.2},
  "stepper": {"dt": 1e-3, "t_end": 0.4, "sample_every": 10},
  "output": {"dir": "OUTDIR", "prefix": "case"}
})";

std::string scenario_with_dir(const fs::path& dir) {
  std::string s = kScenario;
  const std::string key = "OUTDIR";
  s.replace(s.find(key), key.size(), (dir / "out").string());
  return s;
}

} // namespace

TEST_CASE("parse_config: minimal document gets the documented defaults") {
  const ScenarioConfig cfg = parse_config(R"({"model": {"n0":1,"p0":1,"tau_n":1,"tau_p":1}})");
  CHECK(cfg.stepper.dt == doctest::Approx(1e-3));
  CHECK(cfg.grid.dim == 1);
  REQUIRE(cfg.grid.cells.size() == 1);
  CHECK(cfg.grid.cells[0] == 64);
  CHECK(cfg.neutralize == true);
  CHECK(cfg.initial.kind == "equilibrium-perturbed");
}

TEST_CASE("parse_config: validation and schema errors") {
  CHECK_THROWS_AS(parse_config(R"({"model": {"eps": 0.0}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"eps": 2.0, "eps0": 1.0}})"), ValidationError);
  CHECK_THROWS_AS(parse_config("not json"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"mdel": {}})"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"eps": "small"}})"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"stepper": {"dt": -1.0}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"cells": ["a"]}})"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"stepper": {"fit_window_fraction": 2.0}})"),
                  ValidationError);
}

TEST_CASE("materialize: out-of-range trap profile is rejected") {
  const ScenarioConfig cfg = parse_config(R"({
    "grid": {"dim": 1, "cells": [8]},
    "initial": {"kind": "profiles",
                "n": {"profile": "constant", "value": 1.0},
                "p": {"profile": "constant", "value": 1.0},
                "n_tr": {"profile": "constant", "value": 1.5}}
  })");
  CHECK_THROWS_AS(materialize(cfg), ValidationError);
}

TEST_CASE("materialize: neutralize reports the doping shift") {
  const ScenarioConfig cfg = parse_config(R"({
    "model": {"eps": 1e-2},
    "grid": {"dim": 1, "cells": [16]},
    "initial": {"kind": "profiles",
                "n": {"profile": "constant", "value": 1.2},
                "p": {"profile": "constant", "value": 0.8},
                "n_tr": {"profile": "constant", "value": 0.5}},
    "fields": {"doping": {"profile": "constant", "value": 0.0}}
  })");
  const Scenario sc = materialize(cfg);
  CHECK(sc.doping_shift == doctest::Approx(1.2 - 0.8 + 1e-2 * 0.5));
  // after the shift the initial state is exactly neutral
  double defect = 0.0;
  for (int i = 0; i < sc.grid.num_cells; ++i)
    defect += sc.initial.n[i] - sc.initial.p[i] + sc.params.eps * sc.initial.n_tr[i] -
              sc.fields.doping[i];
  CHECK(std::abs(defect * sc.grid.cell_volume) <= 1e-13);
}

TEST_CASE("materialize: refusing to neutralize raises ChargeNeutralityViolation") {
  const ScenarioConfig cfg = parse_config(R"({
    "grid": {"dim": 1, "cells": [8]},
    "neutralize": false,
    "initial": {"kind": "profiles",
                "n": {"profile": "constant", "value": 2.0},
                "p": {"profile": "constant", "value": 1.0},
                "n_tr": {"profile": "constant", "value": 0.5}}
  })");
  CHECK_THROWS_AS(materialize(cfg), ChargeNeutralityViolation);
}

TEST_CASE("evaluate_profile: piecewise and inline-array") {
  const Grid g = build_grid_1d(4); // centers 0.125, 0.375, 0.625, 0.875
  ProfileSpec pw;
  pw.kind = "piecewise";
  pw.breaks = {0.5};
  pw.values = {1.0, 3.0};
  const std::vector<double> v = evaluate_profile(g, pw, "t");
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == 3.0);
  CHECK(v[3] == 3.0);

  ProfileSpec inl;
  inl.kind = "inline-array";
  inl.values = {1.0, 2.0};
  CHECK_THROWS_AS(evaluate_profile(g, inl, "t"), ValidationError);
}

TEST_CASE("cmd_run: emits trajectory CSV and summary JSON with the contract columns") {
  const fs::path dir = temp_dir("run");
  const std::string cfg_path = write_config(dir, "s.json", scenario_with_dir(dir));
  CommandOptions opts;
  opts.quiet = true;
  REQUIRE(cmd_run(cfg_path, opts) == exit_ok);

  const std::string csv = slurp((dir / "out" / "case_trajectory.csv").string());
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "t,E,E_rel,P,Q,l1_n,l1_p,linf_n,linf_p,linf_ntr,h2proxy_psi,min_n,min_p,min_ntr,max_ntr");

  // every emitted E_rel and P above -1e-12, Q constant to 1e-10 relative
  std::string line;
  double q0 = 0.0;
  bool first = true;
  int rows = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(cells, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    REQUIRE(row.size() == 15);
    CHECK(row[2] >= -1e-12);
    CHECK(row[3] >= -1e-12);
    if (first) {
      q0 = row[4];
      first = false;
    }
    CHECK(std::abs(row[4] - q0) <= 1e-10 * (1.0 + std::abs(q0)));
    ++rows;
  }
  CHECK(rows >= 41);

  const std::string json_text = slurp((dir / "out" / "case_summary.json").string());
  for (const char* key : {"\"rate\"", "\"r2\"", "\"drift\"", "\"bounds\"", "\"residuals\"",
                          "\"final\"", "\"neutralization_shift\""})
    CHECK(json_text.find(key) != std::string::npos);
}

TEST_CASE("cmd_run: identical config and seed give byte-identical outputs") {
  const fs::path dir_a = temp_dir("det_a");
  const fs::path dir_b = temp_dir("det_b");
  CommandOptions opts;
  opts.quiet = true;
  REQUIRE(cmd_run(write_config(dir_a, "s.json", scenario_with_dir(dir_a)), opts) == exit_ok);
  REQUIRE(cmd_run(write_config(dir_b, "s.json", scenario_with_dir(dir_b)), opts) == exit_ok);
  CHECK(slurp((dir_a / "out" / "case_trajectory.csv").string()) ==
        slurp((dir_b / "out" / "case_trajectory.csv").string()));
  // summaries differ only in paths, so compare the trajectory plus key fields
  const std::string sa = slurp((dir_a / "out" / "case_summary.json").string());
  const std::string sb = slurp((dir_b / "out" / "case_summary.json").string());
  CHECK(sa == sb);
}

TEST_CASE("cmd_run: missing config file exits with the validation code") {
  CommandOptions opts;
  opts.quiet = true;
  CHECK(cmd_run("/nonexistent/config.json", opts) == exit_validation);
}

TEST_CASE("cmd_run: equilibrium start keeps E_rel at the noise floor") {
  const fs::path dir = temp_dir("eqstart");
  // zero perturbation amplitudes make the initial data the equilibrium itself
  const std::string cfg_path = write_config(dir, "s.json", R"({
    "model": {"eps": 1e-2},
    "grid": {"dim": 1, "cells": [32]},
    "fields": {"doping": {"profile": "cosine", "amplitude": 0.3, "modes": [1]}},
    "initial": {"kind": "equilibrium-perturbed", "seed": 1, "amp_n": 0, "amp_p": 0, "amp_ntr": 0},
    "stepper": {"dt": 1e-3, "t_end": 0.1, "sample_every": 10},
    "output": {"dir": ")" + (dir / "out").string() + R"(", "prefix": "eq"}
  })");
  CommandOptions opts;
  opts.quiet = true;
  REQUIRE(cmd_run(cfg_path, opts) == exit_ok);

  std::istringstream lines(slurp((dir / "out" / "eq_trajectory.csv").string()));
  std::string line;
  std::getline(lines, line); // header
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(cells, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    CHECK(row[2] <= 1e-12); // E_rel stays at the solver noise floor
  }
  const std::string summary = slurp((dir / "out" / "eq_summary.json").string());
  CHECK(summary.find("\"rate\": null") != std::string::npos); // nothing to fit
}

TEST_CASE("cmd_equilibrium: writes n_star, residuals and field dumps") {
  const fs::path dir = temp_dir("eq");
  // symmetric unit configuration: D = eps/2 means n_star = p_star = 1
  const std::string cfg_path = write_config(dir, "eq.json", R"({
    "model": {"eps": 0.01},
    "grid": {"dim": 1, "cells": [16]},
    "fields": {"doping": {"profile": "constant", "value": 0.005}},
    "output": {"dir": ")" + (dir / "out").string() + R"(", "prefix": "eq"}
  })");
  CommandOptions opts;
  opts.quiet = true;
  REQUIRE(cmd_equilibrium(cfg_path, opts) == exit_ok);

  const std::string json_text = slurp((dir / "out" / "eq_equilibrium.json").string());
  CHECK(json_text.find("\"n_star\": 1.0") != std::string::npos);
  CHECK(json_text.find("\"p_star\": 1.0") != std::string::npos);
  for (const char* key :
       {"\"poisson_res\"", "\"scalar_res\"", "\"rn_res\"", "\"rp_res\"", "\"flux_res\""})
    CHECK(json_text.find(key) != std::string::npos);

  const std::string field_csv = slurp((dir / "out" / "eq_psi_inf.csv").string());
  CHECK(field_csv.rfind("cell,x,value", 0) == 0);

  // all residuals at most 1e-10
  std::istringstream ss(json_text);
  std::string token;
  while (ss >> token) {
    for (const char* key : {"poisson_res", "scalar_res", "rn_res", "rp_res", "flux_res"}) {
      if (token.find(key) != std::string::npos) {
        std::string value;
        ss >> value;
        CHECK(std::strtod(value.c_str(), nullptr) <= 1e-10);
      }
    }
  }
}

TEST_CASE("cmd_equilibrium: Newton budget failure exits with the solver code") {
  const fs::path dir = temp_dir("eqfail");
  const std::string cfg_path = write_config(dir, "eq.json", R"({
    "grid": {"dim": 1, "cells": [16]},
    "fields": {"doping": {"profile": "cosine", "amplitude": 2.0, "modes": [1]}},
    "equilibrium": {"max_iters": 1},
    "output": {"dir": ")" + (dir / "out").string() + R"(", "prefix": "eq"}
  })");
  CommandOptions opts;
  opts.quiet = true;
  CHECK(cmd_equilibrium(cfg_path, opts) == exit_solver);
}

TEST_CASE("cmd_sweep_eps: validates the eps list against eps0") {
  const fs::path dir = temp_dir("sweepval");
  const std::string cfg_path = write_config(dir, "s.json", scenario_with_dir(dir));
  CommandOptions opts;
  opts.quiet = true;
  CHECK(cmd_sweep_eps(cfg_path, {1e-2, 2.0}, opts) == exit_validation); // 2 eps0 = 2 > eps0
  CHECK(cmd_sweep_eps(cfg_path, {}, opts) == exit_validation);
  CHECK(cmd_sweep_eps(cfg_path, {-1e-3}, opts) == exit_validation);
}

TEST_CASE("cmd_sweep_eps: single case produces the degenerate ratio 1") {
  const fs::path dir = temp_dir("sweep1");
  const std::string cfg_path = write_config(dir, "s.json", scenario_with_dir(dir));
  CommandOptions opts;
  opts.quiet = true;
  REQUIRE(cmd_sweep_eps(cfg_path, {1e-2}, opts) == exit_ok);
  const std::string json_text = slurp((dir / "out" / "case_sweep.json").string());
  CHECK(json_text.find("\"ratio\": 1.0") != std::string::npos);
  CHECK(json_text.find("\"uniform\": true") != std::string::npos);
  const std::string csv = slurp((dir / "out" / "case_sweep.csv").string());
  CHECK(csv.rfind("eps,rate,r2", 0) == 0);
}

TEST_CASE("cmd_verify: exit codes") {
  CommandOptions opts;
  opts.quiet = true;
  CHECK(cmd_verify(1, 5000, opts) == exit_ok);
  CHECK(cmd_verify(1, 5000, opts, /*flip_test=*/true) == exit_property);
  CHECK(cmd_verify(1, 0, opts) == exit_validation);
}

TEST_CASE("format_double: shortest round-trip representation") {
  for (double v : {0.0, 1.0, -2.5, 1e-3, 3.141592653589793, 6.94e-7, 1e300, -1e-300}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(0.1) == "0.1"); // shortest form, not 0.1000000000000000055
}
