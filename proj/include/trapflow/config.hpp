#pragma once

#include <trapflow/core.hpp>
#include <trapflow/equilibrium.hpp>
#include <trapflow/stepper.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace trapflow {

/// Named analytic profile for a cell field. Kinds: constant, cosine,
/// gaussian-bump, piecewise, inline-array.
struct ProfileSpec {
  std::string kind = "constant";
  double value = 0.0;                ///< constant
  double offset = 0.0;               ///< cosine / gaussian-bump baseline
  double amplitude = 0.0;            ///< cosine / gaussian-bump
  std::vector<int> modes;            ///< cosine: one integer mode per axis
  std::vector<double> center;        ///< gaussian-bump center, one entry per axis
  double width = 0.1;                ///< gaussian-bump standard deviation
  std::vector<double> breaks;        ///< piecewise: ascending breakpoints in (0,1) on x
  std::vector<double> values;        ///< piecewise (breaks.size()+1) or inline-array (per cell)
};

std::vector<double> evaluate_profile(const Grid& grid, const ProfileSpec& spec,
                                     const std::string& path);

/// Initial data: explicit profiles or a perturbation of the computed equilibrium.
struct InitialSpec {
  std::string kind = "equilibrium-perturbed"; ///< or "profiles"
  std::uint64_t seed = 1;
  double amp_n = 0.3;   ///< multiplicative noise amplitude on n
  double amp_p = 0.3;   ///< multiplicative noise amplitude on p
  double amp_ntr = 0.2; ///< additive shift amplitude on n_tr (clamped to [0,1])
  ProfileSpec n, p, n_tr; ///< used when kind == "profiles"
};

struct OutputConfig {
  std::string dir = "out";
  std::string prefix = "run";
};

struct GridSpec {
  int dim = 1;
  std::vector<int> cells = {64};
};

struct ScenarioConfig {
  ModelParams model;
  GridSpec grid;
  ProfileSpec doping, v_n, v_p;
  InitialSpec initial;
  StepperConfig stepper;
  bool neutralize = true;
  double uniformity_bound = 3.0; ///< accepted max/min rate ratio in eps sweeps
  EquilibriumOptions equilibrium;
  OutputConfig output;
};

/// Parses and validates a configuration document (JSON text). Unknown keys are
/// rejected with their path; missing keys fall back to documented defaults.
ScenarioConfig parse_config(const std::string& text);

/// Reads the file and parses it.
ScenarioConfig load_config_file(const std::string& path);

/// Fully materialized scenario: grid, fields (after the optional neutralizing
/// doping shift), reference equilibrium and initial state with consistent psi.
struct Scenario {
  ModelParams params;
  Grid grid;
  MaterialFields fields;
  EquilibriumState eq;
  State initial;
  double doping_shift = 0.0; ///< additive constant applied to D by neutralize
};

/// Grid + material fields only (no initial data); used by the equilibrium command.
struct FieldSetup {
  ModelParams params;
  Grid grid;
  MaterialFields fields;
};

FieldSetup materialize_fields(const ScenarioConfig& cfg);
Scenario materialize(const ScenarioConfig& cfg);

} // namespace trapflow
