#pragma once

#include <trapflow/core.hpp>

#include <vector>

namespace trapflow {

struct EquilibriumResiduals {
  double poisson_res = 0.0; ///< max per-volume residual of the potential equation
  double scalar_res = 0.0;  ///< residual of the averaged charge constraint
  double rn_res = 0.0;      ///< max |R_n(n_inf, n_tr_inf)|
  double rp_res = 0.0;      ///< max |R_p(p_inf, n_tr_inf)|
  double flux_res = 0.0;    ///< max |SG edge flux| over both channels
};

/// Unique steady state. The fields satisfy
///   n_inf = n_star e^{-psi_inf - V_n},  p_inf = p_star e^{psi_inf - V_p},
///   n_tr_inf = n_star / (n_star + n0 e^{psi_inf}),
/// with n_star p_star = n0 p0 and mean(psi_inf) = 0.
struct EquilibriumState {
  std::vector<double> psi_inf;
  std::vector<double> n_inf;
  std::vector<double> p_inf;
  std::vector<double> ntr_inf;
  double n_star = 1.0;
  double p_star = 1.0;
  EquilibriumResiduals residuals;
  std::vector<double> newton_residuals; ///< max-norm residual per Newton iterate

  /// View as a State (t = 0) for entropy evaluations.
  State as_state() const;
};

struct EquilibriumOptions {
  double tol = 1e-12; ///< max-norm of the per-volume nonlinear residual
  int max_iters = 100;
};

/// Solves the transformed potential equation
///   -lambda Lap w - e^{-w - V_n} + n0 p0 e^{w - V_p} - eps/(1 + n0 e^w) = -D
/// by damped Newton with Armijo backtracking on its convex energy (the
/// nonlinearity is strictly increasing, so every Newton matrix is SPD and is
/// factored by banded Cholesky). Afterwards n_star = e^{-mean(w)} and
/// psi_inf = w - mean(w), which realizes the zero-mean normalization without
/// an outer fixed-point loop.
EquilibriumState solve_equilibrium(const Grid& grid, const MaterialFields& fields,
                                   const ModelParams& params,
                                   const EquilibriumOptions& opts = {});

/// Recomputes the residual certificates for an arbitrary candidate state.
EquilibriumResiduals equilibrium_residuals(const EquilibriumState& eq, const Grid& grid,
                                           const MaterialFields& fields,
                                           const ModelParams& params);

} // namespace trapflow
