#include <trapflow/reactions.hpp>

#include <trapflow/errors.hpp>

#include <cmath>

namespace trapflow {

ReactionRates eval_reactions(const State& state, const ModelParams& params,
                             const MaterialFields& fields) {
  const std::size_t n = state.n.size();
  ReactionRates rates;
  rates.r_n.resize(n);
  rates.r_p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ntr = state.n_tr[i];
    rates.r_n[i] =
        (ntr - state.n[i] * (1.0 - ntr) / (params.n0 * fields.mu_n[i])) / params.tau_n;
    rates.r_p[i] =
        (1.0 - ntr - state.p[i] * ntr / (params.p0 * fields.mu_p[i])) / params.tau_p;
  }
  return rates;
}

double frozen_trap_steady_value(double n, double p, double n0mu_n, double p0mu_p,
                                double tau_n, double tau_p) {
  const double a = 1.0 / tau_p + n / (tau_n * n0mu_n);
  const double b = (1.0 + p / p0mu_p) / tau_p + (1.0 + n / n0mu_n) / tau_n;
  return a / b;
}

double frozen_trap_update(double n, double p, double n_tr, double dt, double eps,
                          double n0mu_n, double p0mu_p, double tau_n, double tau_p) {
  const double a = 1.0 / tau_p + n / (tau_n * n0mu_n);
  const double b = (1.0 + p / p0mu_p) / tau_p + (1.0 + n / n0mu_n) / tau_n;
  return (eps * n_tr + dt * a) / (eps + dt * b);
}

namespace {

struct CellUpdate {
  double n, p;
};

// Closed-form carrier updates for a given trap occupancy m; numerator and
// denominator are sums of nonnegative terms, so n+, p+ >= 0 holds exactly.
CellUpdate carriers_for_occupancy(double n, double p, double m, double dt,
                                  const ModelParams& params, double n0mu_n, double p0mu_p) {
  CellUpdate u;
  u.n = (n + dt * m / params.tau_n) / (1.0 + dt * (1.0 - m) / (params.tau_n * n0mu_n));
  u.p = (p + dt * (1.0 - m) / params.tau_p) / (1.0 + dt * m / (params.tau_p * p0mu_p));
  return u;
}

} // namespace

void reaction_substep_cell(double n, double p, double n_tr, double dt,
                           const ModelParams& params, double n0mu_n, double p0mu_p,
                           double& n_out, double& p_out, double& ntr_out) {
  const double eps = params.eps;

  // Conservation defect of the candidate triple (equals the scalar residual of
  // the trap equation): F(m) = (n+(m) - n) - (p+(m) - p) + eps (m - n_tr).
  // F is strictly increasing in m with F(0) <= 0 <= F(1).
  auto defect = [&](double m) {
    const CellUpdate u = carriers_for_occupancy(n, p, m, dt, params, n0mu_n, p0mu_p);
    return (u.n - n) - (u.p - p) + eps * (m - n_tr);
  };

  double lo = 0.0, hi = 1.0;
  double flo = defect(lo), fhi = defect(hi);
  if (flo > 0.0 || fhi < 0.0)
    throw RootBracketFailure("reaction_substep: trap equation has no root in [0,1]");

  double m = std::min(1.0, std::max(0.0, n_tr));
  double fm = defect(m);
  const double eps_mach = 2.220446049250313e-16;
  for (int iter = 0; iter < 200 && fm != 0.0; ++iter) {
    if (fm > 0.0)
      hi = m;
    else
      lo = m;
    if (hi - lo <= eps_mach) break;

    // Newton step on the smooth scalar equation; derivative via the closed forms.
    const CellUpdate u = carriers_for_occupancy(n, p, m, dt, params, n0mu_n, p0mu_p);
    const double den_n = 1.0 + dt * (1.0 - m) / (params.tau_n * n0mu_n);
    const double den_p = 1.0 + dt * m / (params.tau_p * p0mu_p);
    const double dn_dm = (dt / params.tau_n + dt * u.n / (params.tau_n * n0mu_n)) / den_n;
    const double dp_dm = (-dt / params.tau_p - dt * u.p / (params.tau_p * p0mu_p)) / den_p;
    const double deriv = dn_dm - dp_dm + eps;

    double next = m - fm / deriv;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (next == m) break;
    m = next;
    fm = defect(m);
  }

  const CellUpdate u = carriers_for_occupancy(n, p, m, dt, params, n0mu_n, p0mu_p);
  n_out = u.n;
  p_out = u.p;
  ntr_out = m;
}

ReactionStepResult reaction_substep(const State& state, double dt, const ModelParams& params,
                                    const MaterialFields& fields) {
  if (!(dt > 0.0)) throw ValidationError("reaction_substep: dt must be > 0");
  const std::size_t n = state.n.size();
  ReactionStepResult out;
  out.n.resize(n);
  out.p.resize(n);
  out.n_tr.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    reaction_substep_cell(state.n[i], state.p[i], state.n_tr[i], dt, params,
                          params.n0 * fields.mu_n[i], params.p0 * fields.mu_p[i], out.n[i],
                          out.p[i], out.n_tr[i]);
  }
  return out;
}

} // namespace trapflow
