#include <trapflow/commands.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"trapflow - structure-preserving drift-diffusion simulator with a trap level"};
  app.require_subcommand(1);
  app.fallthrough(); // lets --out-dir/--quiet appear after the subcommand too

  trapflow::CommandOptions opts;
  app.add_option("--out-dir", opts.out_dir, "Override the config's output directory");
  app.add_flag("--quiet", opts.quiet, "Suppress progress output");

  std::string run_config, eq_config, sweep_config;
  std::vector<double> eps_list;
  std::uint64_t seed = 1;
  long samples = 100000;
  bool flip = false;

  CLI::App* run = app.add_subcommand("run", "Integrate a scenario and emit trajectory CSV + summary JSON");
  run->add_option("config", run_config, "Scenario configuration (JSON)")->required();

  CLI::App* eq = app.add_subcommand("equilibrium", "Solve the steady state and emit JSON + field dumps");
  eq->add_option("config", eq_config, "Scenario configuration (JSON)")->required();

  CLI::App* sweep = app.add_subcommand("sweep-eps", "Run the scenario for several eps values");
  sweep->add_option("config", sweep_config, "Scenario configuration (JSON)")->required();
  sweep->add_option("--eps", eps_list, "Comma-separated eps values")
      ->required()
      ->delimiter(',');

  CLI::App* verify = app.add_subcommand("verify", "Run the randomized inequality/property suites");
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--samples", samples, "Sample count per suite");
  verify->add_flag("--flip-test", flip)->group(""); // hidden: demonstrates the failure path

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : trapflow::exit_validation;
  }

  if (run->parsed()) return trapflow::cmd_run(run_config, opts);
  if (eq->parsed()) return trapflow::cmd_equilibrium(eq_config, opts);
  if (sweep->parsed()) return trapflow::cmd_sweep_eps(sweep_config, eps_list, opts);
  if (verify->parsed()) return trapflow::cmd_verify(seed, samples, opts, flip);
  return trapflow::exit_validation;
}
