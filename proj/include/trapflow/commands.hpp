#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trapflow {

/// Exit codes shared by the commands and the CLI driver.
inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_solver = 3;
inline constexpr int exit_property = 4;

struct CommandOptions {
  std::string out_dir;  ///< overrides the config's output.dir when nonempty
  bool quiet = false;
};

/// Runs the time integration and writes <prefix>_trajectory.csv and
/// <prefix>_summary.json.
int cmd_run(const std::string& config_path, const CommandOptions& opts);

/// Solves the equilibrium and writes <prefix>_equilibrium.json plus field dumps.
int cmd_equilibrium(const std::string& config_path, const CommandOptions& opts);

/// Runs the scenario once per eps value and writes per-case outputs plus the
/// combined <prefix>_sweep.csv / <prefix>_sweep.json table.
int cmd_sweep_eps(const std::string& config_path, const std::vector<double>& eps_list,
                  const CommandOptions& opts);

/// Randomized oracle suites (elementary inequalities, CKP, flux and reaction
/// micro-properties). flip_test deliberately negates one margin to demonstrate
/// the failure path.
int cmd_verify(std::uint64_t seed, long samples, const CommandOptions& opts,
               bool flip_test = false);

} // namespace trapflow
