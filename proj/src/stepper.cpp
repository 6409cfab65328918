#include <trapflow/stepper.hpp>

#include <trapflow/errors.hpp>
#include <trapflow/poisson.hpp>
#include <trapflow/reactions.hpp>
#include <trapflow/transport.hpp>

#include <cmath>
#include <string>

namespace trapflow {

void StepperConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("stepper.dt must be > 0");
  if (!(t_end >= 0.0)) throw ValidationError("stepper.t_end must be >= 0");
  if (gummel_iters < 1) throw ValidationError("stepper.gummel_iters must be >= 1");
  if (sample_every < 1) throw ValidationError("stepper.sample_every must be >= 1");
  if (!(tol_linear > 0.0) || !(tol_scalar > 0.0))
    throw ValidationError("stepper tolerances must be > 0");
  if (!(fit_window_fraction > 0.0 && fit_window_fraction <= 1.0))
    throw ValidationError("stepper.fit_window_fraction must lie in (0,1]");
}

std::vector<double> TrajectoryLog::times() const {
  std::vector<double> t(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) t[i] = samples[i].t;
  return t;
}

std::vector<double> TrajectoryLog::column(double EntropyReport::* field) const {
  std::vector<double> v(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) v[i] = samples[i].report.*field;
  return v;
}

namespace {

std::vector<double> charge_rhs(const State& s, const MaterialFields& fields,
                               const ModelParams& params) {
  std::vector<double> f(s.n.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = s.n[i] - s.p[i] + params.eps * s.n_tr[i] - fields.doping[i];
  return f;
}

std::vector<double> solve_psi(const State& s, const NeumannLaplacian& lap,
                              const MaterialFields& fields, const ModelParams& params,
                              double tol) {
  PoissonOptions opts;
  opts.tol = tol;
  opts.initial_guess = std::span<const double>(s.psi);
  return solve_poisson(lap, charge_rhs(s, fields, params), params.lambda, opts);
}

// Transport of one channel with Gummel-lagged self-consistency: the potential
// is re-solved from the current densities, then frozen for the implicit solve.
void transport_channel(State& s, Channel ch, double dt, const NeumannLaplacian& lap,
                       const Grid& grid, const MaterialFields& fields,
                       const ModelParams& params, const StepperConfig& cfg) {
  std::vector<double>& u = (ch == Channel::electron) ? s.n : s.p;
  const std::vector<double> u_old = u;
  for (int g = 0; g < cfg.gummel_iters; ++g) {
    s.psi = solve_psi(s, lap, fields, params, cfg.tol_linear);
    u = transport_substep(grid, fields, ch, u_old, s.psi, dt);
  }
}

} // namespace

State with_consistent_potential(State state, const Grid& grid, const MaterialFields& fields,
                                const ModelParams& params, double tol) {
  if (state.psi.size() != state.n.size()) state.psi.assign(state.n.size(), 0.0);
  const NeumannLaplacian lap(grid);
  state.psi = solve_psi(state, lap, fields, params, tol);
  return state;
}

State step(const State& state, const StepperConfig& cfg, const Grid& grid,
           const MaterialFields& fields, const ModelParams& params) {
  cfg.validate();
  const NeumannLaplacian lap(grid);
  State s = state;

  ReactionStepResult half = reaction_substep(s, 0.5 * cfg.dt, params, fields);
  s.n = std::move(half.n);
  s.p = std::move(half.p);
  s.n_tr = std::move(half.n_tr);

  transport_channel(s, Channel::electron, cfg.dt, lap, grid, fields, params, cfg);
  transport_channel(s, Channel::hole, cfg.dt, lap, grid, fields, params, cfg);

  half = reaction_substep(s, 0.5 * cfg.dt, params, fields);
  s.n = std::move(half.n);
  s.p = std::move(half.p);
  s.n_tr = std::move(half.n_tr);

  s.psi = solve_psi(s, lap, fields, params, cfg.tol_linear);
  s.t = state.t + cfg.dt;
  return s;
}

TrajectoryLog run(const State& initial, const StepperConfig& cfg, const Grid& grid,
                  const MaterialFields& fields, const ModelParams& params,
                  const EquilibriumState& eq) {
  cfg.validate();
  params.validate();
  validate_state(grid, initial);

  const std::vector<double> f0 = charge_rhs(initial, fields, params);
  double fbar = cell_average(grid, f0);
  double fabs1 = 0.0;
  for (double v : f0) fabs1 += std::abs(v);
  fabs1 *= grid.cell_volume;
  if (std::abs(fbar) > 1e-10 * (1.0 + fabs1))
    throw ChargeNeutralityViolation(
        "run: initial data violate charge neutrality, mean defect = " + std::to_string(fbar));

  State s = with_consistent_potential(initial, grid, fields, params, cfg.tol_linear);
  s.t = 0.0;

  TrajectoryLog log;
  log.samples.push_back({0.0, make_entropy_report(s, eq, grid, fields, params)});

  const auto total_steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
  for (long k = 1; k <= total_steps; ++k) {
    s = step(s, cfg, grid, fields, params);
    if (k % cfg.sample_every == 0 || k == total_steps)
      log.samples.push_back({s.t, make_entropy_report(s, eq, grid, fields, params)});
  }

  try {
    log.fit = fit_decay_rate(log.times(), log.column(&EntropyReport::relative_entropy),
                             cfg.fit_window_fraction);
  } catch (const InsufficientData&) {
    log.fit.reset(); // e.g. a run started at the equilibrium stays at the noise floor
  }
  return log;
}

} // namespace trapflow
