#include <trapflow/commands.hpp>

#include <trapflow/config.hpp>
#include <trapflow/entropy.hpp>
#include <trapflow/errors.hpp>
#include <trapflow/output.hpp>
#include <trapflow/poisson.hpp>
#include <trapflow/reactions.hpp>
#include <trapflow/rng.hpp>
#include <trapflow/stepper.hpp>
#include <trapflow/transport.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <iostream>
#include <limits>

namespace trapflow {

namespace {

namespace fs = std::filesystem;

std::string resolved_dir(const ScenarioConfig& cfg, const CommandOptions& opts) {
  return opts.out_dir.empty() ? cfg.output.dir : opts.out_dir;
}

// Errors always go to stderr; --quiet only silences progress output.
int classify(const std::exception& e, const CommandOptions&) {
  std::cerr << "error: " << e.what() << '\n';
  if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ValidationError*>(&e))
    return exit_validation;
  return exit_solver;
}

} // namespace

int cmd_run(const std::string& config_path, const CommandOptions& opts) {
  try {
    const ScenarioConfig cfg = load_config_file(config_path);
    const Scenario sc = materialize(cfg);
    const TrajectoryLog log = run(sc.initial, cfg.stepper, sc.grid, sc.fields, sc.params, sc.eq);

    const std::string dir = resolved_dir(cfg, opts);
    fs::create_directories(dir);
    const std::string base = (fs::path(dir) / cfg.output.prefix).string();
    write_trajectory_csv(base + "_trajectory.csv", log);
    write_run_summary_json(base + "_summary.json", sc, log);
    if (!opts.quiet) {
      std::cout << "wrote " << base << "_trajectory.csv and " << base << "_summary.json\n";
      if (log.fit)
        std::cout << "fitted decay rate " << log.fit->rate << " (r2 " << log.fit->r_squared
                  << ")\n";
    }
    return exit_ok;
  } catch (const std::exception& e) {
    return classify(e, opts);
  }
}

int cmd_equilibrium(const std::string& config_path, const CommandOptions& opts) {
  try {
    const ScenarioConfig cfg = load_config_file(config_path);
    const FieldSetup fsup = materialize_fields(cfg);
    EquilibriumState eq;
    try {
      eq = solve_equilibrium(fsup.grid, fsup.fields, fsup.params, cfg.equilibrium);
    } catch (const NonConvergence& e) {
      std::cerr << "error: " << e.what() << " (final residual " << e.final_residual << ")\n";
      return exit_solver;
    }
    std::string json_path;
    write_equilibrium_output(resolved_dir(cfg, opts), cfg.output.prefix, fsup.grid, eq,
                             json_path);
    if (!opts.quiet)
      std::cout << "n_star " << eq.n_star << ", p_star " << eq.p_star << "; wrote " << json_path
                << '\n';
    return exit_ok;
  } catch (const std::exception& e) {
    return classify(e, opts);
  }
}

int cmd_sweep_eps(const std::string& config_path, const std::vector<double>& eps_list,
                  const CommandOptions& opts) {
  try {
    const ScenarioConfig cfg = load_config_file(config_path);
    if (eps_list.empty()) throw ValidationError("sweep-eps: eps list must not be empty");
    for (double e : eps_list)
      if (!(e > 0.0) || e > cfg.model.eps0)
        throw ValidationError("sweep-eps: every eps must lie in (0, eps0], got " +
                              std::to_string(e));

    const std::string dir = resolved_dir(cfg, opts);
    fs::create_directories(dir);

    // Each case is fully private: its own materialization (the neutralizing
    // doping shift depends on eps) and its own trajectory.
    auto run_case = [&](std::size_t idx) {
      ScenarioConfig case_cfg = cfg;
      case_cfg.model.eps = eps_list[idx];
      const Scenario sc = materialize(case_cfg);
      const TrajectoryLog log =
          run(sc.initial, case_cfg.stepper, sc.grid, sc.fields, sc.params, sc.eq);

      SweepCase result;
      result.eps = eps_list[idx];
      result.fit_valid = log.fit.has_value();
      if (log.fit) {
        result.rate = log.fit->rate;
        result.r_squared = log.fit->r_squared;
      }
      const std::string base =
          (fs::path(dir) / (cfg.output.prefix + "_eps" + std::to_string(idx))).string();
      write_trajectory_csv(base + "_trajectory.csv", log);
      write_run_summary_json(base + "_summary.json", sc, log);
      result.summary_path = base + "_summary.json";
      return result;
    };

    std::vector<std::future<SweepCase>> futures;
    futures.reserve(eps_list.size());
    for (std::size_t i = 0; i < eps_list.size(); ++i)
      futures.push_back(std::async(std::launch::async, run_case, i));
    std::vector<SweepCase> cases;
    cases.reserve(eps_list.size());
    for (auto& f : futures) cases.push_back(f.get());

    write_sweep_output(dir, cfg.output.prefix, cases, cfg.uniformity_bound);
    if (!opts.quiet) {
      for (const SweepCase& c : cases)
        std::cout << "eps " << c.eps << ": rate "
                  << (c.fit_valid ? std::to_string(c.rate) : std::string("n/a")) << '\n';
    }
    return exit_ok;
  } catch (const std::exception& e) {
    return classify(e, opts);
  }
}

namespace {

struct Suite {
  std::string name;
  double worst_margin = 0.0;
  bool passed = false;
};

Suite verify_elementary(std::uint64_t seed, long samples) {
  const InequalityReport rep =
      check_elementary_inequalities(static_cast<std::size_t>(samples), seed);
  Suite s{"elementary-inequalities",
          std::min({rep.worst_product_margin, rep.worst_sqrt_margin, rep.worst_pinsker_margin}),
          rep.passed};
  return s;
}

Suite verify_ckp(std::uint64_t seed, long samples) {
  Rng rng(seed ^ 0x9d5c0f2au);
  const Grid grid = build_grid_1d(8);
  Suite s{"ckp-inequality", std::numeric_limits<double>::infinity(), true};
  const long trials = std::max(1L, samples / 100);
  std::vector<double> f(8), g(8);
  for (long k = 0; k < trials; ++k) {
    for (std::size_t i = 0; i < 8; ++i) {
      f[i] = rng.log_uniform(1e-6, 1e2);
      g[i] = rng.log_uniform(1e-6, 1e2);
    }
    const auto [lhs, rhs] = ckp_lower_bound(grid, f, g);
    s.worst_margin = std::min(s.worst_margin, lhs - rhs);
  }
  s.passed = s.worst_margin >= -1e-12;
  return s;
}

Suite verify_sg(std::uint64_t seed, long samples) {
  Rng rng(seed ^ 0x51ab3e7cu);
  Suite s{"sg-gibbs-flux", std::numeric_limits<double>::infinity(), true};
  double worst_abs = 0.0;
  const long trials = std::max(1L, samples / 10);
  for (long k = 0; k < trials; ++k) {
    const double phi_l = rng.uniform(-3.0, 3.0);
    const double phi_r = rng.uniform(-3.0, 3.0);
    const double c = rng.log_uniform(1e-3, 1e1);
    const double flux =
        sg_edge_flux(c * std::exp(-phi_l), c * std::exp(-phi_r), phi_r - phi_l);
    worst_abs = std::max(worst_abs, std::abs(flux));

    // antisymmetry under orientation reversal
    const double nl = rng.log_uniform(1e-6, 1e2), nr = rng.log_uniform(1e-6, 1e2);
    const double d = rng.uniform(-20.0, 20.0);
    if (sg_edge_flux(nl, nr, d) != -sg_edge_flux(nr, nl, -d)) {
      s.passed = false;
      s.worst_margin = -1.0;
      return s;
    }
  }
  s.worst_margin = 1e-13 - worst_abs;
  s.passed = s.worst_margin >= 0.0;
  return s;
}

Suite verify_reactions(std::uint64_t seed, long samples) {
  Rng rng(seed ^ 0x7723c2d1u);
  Suite s{"reaction-conservation", std::numeric_limits<double>::infinity(), true};
  const long trials = std::max(1L, samples / 10);
  for (long k = 0; k < trials; ++k) {
    ModelParams params;
    params.n0 = rng.log_uniform(0.5, 2.0);
    params.p0 = rng.log_uniform(0.5, 2.0);
    params.tau_n = rng.log_uniform(0.5, 2.0);
    params.tau_p = rng.log_uniform(0.5, 2.0);
    params.eps = rng.log_uniform(1e-6, 1.0);
    params.eps0 = 1.0;
    const double n = rng.uniform(0.0, 3.0), p = rng.uniform(0.0, 3.0);
    const double ntr = rng.uniform(0.0, 1.0);
    const double dt = rng.log_uniform(1e-4, 1e2);
    double n1, p1, m1;
    reaction_substep_cell(n, p, ntr, dt, params, params.n0, params.p0, n1, p1, m1);
    if (!(n1 >= 0.0) || !(p1 >= 0.0) || !(m1 >= 0.0 && m1 <= 1.0)) {
      s.passed = false;
      s.worst_margin = -1.0;
      return s;
    }
    const double defect =
        std::abs((n1 - p1 + params.eps * m1) - (n - p + params.eps * ntr));
    s.worst_margin =
        std::min(s.worst_margin, 1e-13 * (1.0 + std::abs(n) + std::abs(p)) - defect);
  }
  s.passed = s.worst_margin >= 0.0;
  return s;
}

Suite verify_transport(std::uint64_t seed, long samples) {
  Rng rng(seed ^ 0x1c8f003bu);
  Suite s{"transport-mass-positivity", std::numeric_limits<double>::infinity(), true};
  const Grid grid = build_grid_1d(32);
  const auto n = static_cast<std::size_t>(grid.num_cells);
  const long trials = std::clamp(samples / 1000, 1L, 200L);
  for (long k = 0; k < trials; ++k) {
    std::vector<double> doping(n, 0.0), vn(n), vp(n, 0.0), u(n), psi(n);
    for (std::size_t i = 0; i < n; ++i) {
      vn[i] = rng.uniform(-1.0, 1.0);
      u[i] = rng.uniform(0.0, 2.0);
      psi[i] = rng.uniform(-1.0, 1.0);
    }
    const MaterialFields fields = make_fields(grid, doping, vn, vp);
    const double dt = rng.log_uniform(1e-3, 1.0);
    const std::vector<double> out =
        transport_substep(grid, fields, Channel::electron, u, psi, dt);
    double mass_in = 0.0, mass_out = 0.0, min_out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass_in += u[i];
      mass_out += out[i];
      min_out = std::min(min_out, out[i]);
    }
    const double rel = std::abs(mass_out - mass_in) / (1.0 + std::abs(mass_in));
    s.worst_margin = std::min(s.worst_margin, 1e-12 - rel);
    if (min_out < 0.0) {
      s.passed = false;
      s.worst_margin = min_out;
      return s;
    }
  }
  s.passed = s.worst_margin >= 0.0;
  return s;
}

} // namespace

int cmd_verify(std::uint64_t seed, long samples, const CommandOptions& opts, bool flip_test) {
  try {
    if (samples < 1) throw ValidationError("verify: samples must be >= 1");
    std::vector<Suite> suites;
    suites.push_back(verify_elementary(seed, samples));
    suites.push_back(verify_ckp(seed, samples));
    suites.push_back(verify_sg(seed, samples));
    suites.push_back(verify_reactions(seed, samples));
    suites.push_back(verify_transport(seed, samples));

    if (flip_test && !suites.empty()) {
      suites.front().worst_margin = -std::abs(suites.front().worst_margin) - 1.0;
      suites.front().passed = false;
      suites.front().name += " (deliberately flipped)";
    }

    bool all = true;
    for (const Suite& s : suites) {
      all = all && s.passed;
      if (!opts.quiet)
        std::cout << (s.passed ? "PASS" : "FAIL") << "  " << s.name << "  worst margin "
                  << s.worst_margin << '\n';
    }
    return all ? exit_ok : exit_property;
  } catch (const std::exception& e) {
    return classify(e, opts);
  }
}

} // namespace trapflow
