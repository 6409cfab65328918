#pragma once

#include <trapflow/core.hpp>
#include <trapflow/equilibrium.hpp>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace trapflow {

/// Entropy functional
///   E = int n ln(n/(n0 mu_n)) - (n - n0 mu_n) + p ln(p/(p0 mu_p)) - (p - p0 mu_p)
///       + (lambda/2) |grad psi|^2 + eps [n_tr ln n_tr + (1-n_tr) ln(1-n_tr) + ln 2],
/// with 0 ln 0 = 0 and the gradient term assembled from face differences.
/// Nonnegative termwise.
double entropy(const State& state, const Grid& grid, const MaterialFields& fields,
               const ModelParams& params);

/// Entropy relative to the equilibrium,
///   int n ln(n/n_inf) - (n - n_inf) + p ln(p/p_inf) - (p - p_inf)
///       + (lambda/2) |grad(psi - psi_inf)|^2 + eps * trap Bregman term,
/// where the trap term is int_{ntr_inf}^{n_tr} (ln(s/(1-s)) - ln(ntr_inf/(1-ntr_inf))) ds
/// in closed form. Equals entropy(state) - entropy(eq) when the state carries the
/// same total charge as the equilibrium.
double relative_entropy(const State& state, const EquilibriumState& eq, const Grid& grid,
                        const MaterialFields& fields, const ModelParams& params);

/// Evaluates both routes to the relative entropy and throws
/// ChargeNeutralityViolation if they disagree beyond 1e-9 * (1 + E): a mismatch
/// means the state does not share the equilibrium's charge class.
double relative_entropy_checked(const State& state, const EquilibriumState& eq,
                                const Grid& grid, const MaterialFields& fields,
                                const ModelParams& params);

/// Entropy production
///   P = sum_faces conductance G^2 / logmean(u_L, u_R)   (both channels)
///     + sum_cells vol [ (n_tr/tau_n)(x-1) ln x + ((1-n_tr)/tau_p)(y-1) ln y ],
/// with x = n(1-n_tr)/(n0 mu_n n_tr), y = p n_tr/(p0 mu_p (1-n_tr)).
/// Each term is nonnegative; a degenerate log with nonzero prefactor yields +inf.
double entropy_production(const State& state, const Grid& grid, const MaterialFields& fields,
                          const ModelParams& params);

/// Csiszar-Kullback-Pinsker bound. Returns (lhs, rhs) with
///   lhs = int (f ln(f/g) - f + g),  rhs = 3/(2 fbar + 4 gbar) ||f - g||_l1^2,
/// and lhs >= rhs. Throws NonpositiveReference if g is not strictly positive.
std::pair<double, double> ckp_lower_bound(const Grid& grid, std::span<const double> f,
                                          std::span<const double> g);

struct InequalityReport {
  double worst_product_margin = 0.0; ///< (sqrt(ab)-sqrt(a0 b0))^2 - (a-a0)(b-b0)
  double worst_sqrt_margin = 0.0;    ///< (x-y) ln(x/y) - 4 (sqrt x - sqrt y)^2
  double worst_pinsker_margin = 0.0; ///< h(u) = (2u+4)(u ln u - u + 1) - 3(u-1)^2
  bool passed = false;
};

/// Randomized check of the three elementary inequalities behind the decay
/// estimates, on uniform and log-uniform samples. Fails if any margin < -1e-12.
InequalityReport check_elementary_inequalities(std::size_t samples, std::uint64_t seed);

struct DecayFit {
  double rate = 0.0;        ///< -slope of the ln(value) vs t fit
  double intercept = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t samples_used = 0;
};

/// Least-squares affine fit of ln(values) vs times over the last
/// window_fraction of the samples that exceed the floor. Requires >= 10 usable
/// samples, else throws InsufficientData.
DecayFit fit_exponential_decay(std::span<const double> times, std::span<const double> values,
                               double window_fraction, double floor);

/// Fit of the relative entropy with the default floor 10 * machine epsilon
/// scaled by the first sample.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> relative_entropy,
                        double window_fraction);

/// Assembles the per-sample diagnostics record.
EntropyReport make_entropy_report(const State& state, const EquilibriumState& eq,
                                  const Grid& grid, const MaterialFields& fields,
                                  const ModelParams& params);

} // namespace trapflow
