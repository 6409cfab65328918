#pragma once

#include <trapflow/core.hpp>

#include <span>
#include <vector>

namespace trapflow {

/// Per-cell recombination rates:
///   R_n = (1/tau_n) (n_tr - n (1 - n_tr) / (n0 mu_n)),
///   R_p = (1/tau_p) (1 - n_tr - p n_tr / (p0 mu_p)).
struct ReactionRates {
  std::vector<double> r_n;
  std::vector<double> r_p;
};

ReactionRates eval_reactions(const State& state, const ModelParams& params,
                             const MaterialFields& fields);

/// Steady trap occupancy A/B for frozen carrier densities, where
/// A = 1/tau_p + n/(tau_n n0 mu_n) and B collects both loss channels.
/// Exposed for the fixed-point diagnostics of the substep.
double frozen_trap_steady_value(double n, double p, double n0mu_n, double p0mu_p,
                                double tau_n, double tau_p);

/// Diagnostic-only implicit trap update with frozen carriers: the ODE
/// eps dm/dt = A - B m advanced by one implicit Euler step,
/// m+ = (eps m + dt A) / (eps + dt B). Its fixed point is A/B.
double frozen_trap_update(double n, double p, double n_tr, double dt, double eps,
                          double n0mu_n, double p0mu_p, double tau_n, double tau_p);

struct ReactionStepResult {
  std::vector<double> n;
  std::vector<double> p;
  std::vector<double> n_tr;
};

/// One cell of the implicit Euler reaction update. Solves the scalar equation
/// for the new trap occupancy m in [0,1] by safeguarded Newton with bisection
/// fallback, then recovers n+, p+ from their affine closed forms
///   n+ = (n + dt m / tau_n) / (1 + dt (1-m) / (tau_n n0 mu_n)),
///   p+ = (p + dt (1-m) / tau_p) / (1 + dt m / (tau_p p0 mu_p)).
/// The update conserves n - p + eps n_tr to roundoff for every dt and eps.
void reaction_substep_cell(double n, double p, double n_tr, double dt,
                           const ModelParams& params, double n0mu_n, double p0mu_p,
                           double& n_out, double& p_out, double& ntr_out);

/// Implicit Euler reaction substep applied cell by cell.
ReactionStepResult reaction_substep(const State& state, double dt, const ModelParams& params,
                                    const MaterialFields& fields);

} // namespace trapflow
