#pragma once

#include <trapflow/core.hpp>
#include <trapflow/entropy.hpp>
#include <trapflow/equilibrium.hpp>

#include <optional>
#include <vector>

namespace trapflow {

struct StepperConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int gummel_iters = 1;    ///< inner self-consistency iterations per transport substep
  int sample_every = 10;   ///< diagnostic cadence in steps
  double tol_linear = 1e-12;
  double tol_scalar = 1e-14;
  double fit_window_fraction = 0.5;

  void validate() const;
};

struct TrajectorySample {
  double t = 0.0;
  EntropyReport report;
};

struct TrajectoryLog {
  std::vector<TrajectorySample> samples;
  std::optional<DecayFit> fit; ///< populated post-run when enough samples decay

  std::vector<double> times() const;
  std::vector<double> column(double EntropyReport::* field) const;
};

/// One Strang step: half reaction, transport for n then p (each against a
/// freshly solved and then frozen potential), half reaction, final Poisson
/// re-solve. Conserves the total charge mean(n - p + eps n_tr) exactly up to
/// linear-solver residuals.
State step(const State& state, const StepperConfig& cfg, const Grid& grid,
           const MaterialFields& fields, const ModelParams& params);

/// Advances from the initial state to t_end, sampling diagnostics against the
/// given equilibrium. The initial data must satisfy the discrete
/// charge-neutrality condition mean(n - p + eps n_tr - D) = 0; the initial
/// potential is (re)solved internally.
TrajectoryLog run(const State& initial, const StepperConfig& cfg, const Grid& grid,
                  const MaterialFields& fields, const ModelParams& params,
                  const EquilibriumState& eq);

/// Solves the Poisson equation for the state's own charge and returns the
/// state with the consistent potential.
State with_consistent_potential(State state, const Grid& grid, const MaterialFields& fields,
                                const ModelParams& params, double tol = 1e-12);

} // namespace trapflow
