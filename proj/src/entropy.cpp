#include <trapflow/entropy.hpp>

#include <trapflow/errors.hpp>
#include <trapflow/poisson.hpp>
#include <trapflow/rng.hpp>
#include <trapflow/transport.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace trapflow {

namespace {

constexpr double kZeroDensity = 1e-300; // below this a density is treated as an exact zero

// u ln u with the 0 ln 0 = 0 convention.
double xlogx(double u) { return (u <= kZeroDensity) ? 0.0 : u * std::log(u); }

// Boltzmann relative term u ln(u/c) - (u - c) >= 0 for c > 0.
double boltzmann(double u, double c) {
  if (u <= kZeroDensity) return c;
  return u * std::log(u / c) - (u - c);
}

// Mixing entropy of the trap occupancy, s ln s + (1-s) ln(1-s), in [-ln 2, 0].
double mixing(double s) { return xlogx(s) + xlogx(1.0 - s); }

// Logarithmic mean with continuous extensions; 0 when either argument is 0.
double log_mean(double a, double b) {
  if (a <= kZeroDensity || b <= kZeroDensity) return 0.0;
  if (a == b) return a;
  return (a - b) / (std::log(a) - std::log(b));
}

} // namespace

double entropy(const State& state, const Grid& grid, const MaterialFields& fields,
               const ModelParams& params) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  double cell_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cn = params.n0 * fields.mu_n[i];
    const double cp = params.p0 * fields.mu_p[i];
    const double trap = mixing(state.n_tr[i]) + std::numbers::ln2;
    cell_sum += boltzmann(state.n[i], cn) + boltzmann(state.p[i], cp) + params.eps * trap;
  }
  const NeumannLaplacian lap(grid);
  return cell_sum * grid.cell_volume + 0.5 * params.lambda * lap.dirichlet_form(state.psi);
}

double relative_entropy(const State& state, const EquilibriumState& eq, const Grid& grid,
                        const MaterialFields& fields, const ModelParams& params) {
  (void)fields;
  const auto n = static_cast<std::size_t>(grid.num_cells);
  double cell_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ntr = state.n_tr[i];
    const double ntr_eq = eq.ntr_inf[i];
    // Bregman divergence of the mixing entropy.
    const double trap = mixing(ntr) - mixing(ntr_eq) -
                        (ntr - ntr_eq) * std::log(ntr_eq / (1.0 - ntr_eq));
    cell_sum += boltzmann(state.n[i], eq.n_inf[i]) + boltzmann(state.p[i], eq.p_inf[i]) +
                params.eps * trap;
  }
  std::vector<double> dpsi(n);
  for (std::size_t i = 0; i < n; ++i) dpsi[i] = state.psi[i] - eq.psi_inf[i];
  const NeumannLaplacian lap(grid);
  return cell_sum * grid.cell_volume + 0.5 * params.lambda * lap.dirichlet_form(dpsi);
}

double relative_entropy_checked(const State& state, const EquilibriumState& eq,
                                const Grid& grid, const MaterialFields& fields,
                                const ModelParams& params) {
  const double direct = relative_entropy(state, eq, grid, fields, params);
  const double e_state = entropy(state, grid, fields, params);
  const double e_eq = entropy(eq.as_state(), grid, fields, params);
  const double mismatch = std::abs(direct - (e_state - e_eq));
  if (mismatch > 1e-9 * (1.0 + e_state))
    throw ChargeNeutralityViolation(
        "relative_entropy: identity mismatch " + std::to_string(mismatch) +
        "; the state does not share the equilibrium's total charge");
  return direct;
}

double entropy_production(const State& state, const Grid& grid, const MaterialFields& fields,
                          const ModelParams& params) {
  const double inf = std::numeric_limits<double>::infinity();
  double flux_sum = 0.0;
  for (Channel ch : {Channel::electron, Channel::hole}) {
    const std::vector<double> phi = channel_potential(ch, fields, state.psi);
    const std::vector<double>& u = (ch == Channel::electron) ? state.n : state.p;
    for (const Face& f : grid.faces) {
      const double g = sg_edge_flux(u[f.left], u[f.right], phi[f.right] - phi[f.left]);
      const double mean = log_mean(u[f.left], u[f.right]);
      if (mean <= 0.0) {
        if (g != 0.0) return inf;
        continue;
      }
      flux_sum += f.conductance * g * g / mean;
    }
  }

  double reaction_sum = 0.0;
  const auto n = static_cast<std::size_t>(grid.num_cells);
  for (std::size_t i = 0; i < n; ++i) {
    const double ntr = state.n_tr[i];
    const double pre_n = ntr / params.tau_n;
    if (pre_n > 0.0) {
      const double x = state.n[i] * (1.0 - ntr) / (params.n0 * fields.mu_n[i] * ntr);
      if (x <= kZeroDensity || std::isinf(x)) return inf;
      reaction_sum += pre_n * (x - 1.0) * std::log(x);
    }
    const double pre_p = (1.0 - ntr) / params.tau_p;
    if (pre_p > 0.0) {
      const double y = state.p[i] * ntr / (params.p0 * fields.mu_p[i] * (1.0 - ntr));
      if (y <= kZeroDensity || std::isinf(y)) return inf;
      reaction_sum += pre_p * (y - 1.0) * std::log(y);
    }
  }
  return flux_sum + reaction_sum * grid.cell_volume;
}

std::pair<double, double> ckp_lower_bound(const Grid& grid, std::span<const double> f,
                                          std::span<const double> g) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  if (f.size() != n || g.size() != n)
    throw ValidationError("ckp_lower_bound: field lengths do not match grid");
  double lhs = 0.0, l1 = 0.0, fbar = 0.0, gbar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(g[i] > 0.0)) throw NonpositiveReference("ckp_lower_bound: g must be > 0");
    if (!(f[i] >= 0.0)) throw ValidationError("ckp_lower_bound: f must be >= 0");
    lhs += boltzmann(f[i], g[i]);
    l1 += std::abs(f[i] - g[i]);
    fbar += f[i];
    gbar += g[i];
  }
  const double vol = grid.cell_volume;
  lhs *= vol;
  l1 *= vol;
  fbar *= vol;
  gbar *= vol;
  const double rhs = 3.0 / (2.0 * fbar + 4.0 * gbar) * l1 * l1;
  return {lhs, rhs};
}

InequalityReport check_elementary_inequalities(std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("check_elementary_inequalities: samples must be >= 1");
  Rng rng(seed);
  InequalityReport rep;
  rep.worst_product_margin = std::numeric_limits<double>::infinity();
  rep.worst_sqrt_margin = std::numeric_limits<double>::infinity();
  rep.worst_pinsker_margin = std::numeric_limits<double>::infinity();

  auto draw = [&](std::size_t k) {
    // Alternate uniform and log-uniform sampling to cover both scales.
    return (k % 2 == 0) ? rng.uniform(0.0, 10.0) : rng.log_uniform(1e-8, 1e4);
  };

  for (std::size_t k = 0; k < samples; ++k) {
    const double a = draw(k), a0 = draw(k + 1), b = draw(k), b0 = draw(k + 1);
    const double lhs = (a - a0) * (b - b0);
    const double s = std::sqrt(a * b) - std::sqrt(a0 * b0);
    rep.worst_product_margin = std::min(rep.worst_product_margin, s * s - lhs);

    const double x = draw(k), y = std::max(draw(k + 1), 1e-12);
    const double sq = std::sqrt(x) - std::sqrt(y);
    const double margin = (x - y) * (x <= 0.0 ? 0.0 : std::log(x / y)) - 4.0 * sq * sq;
    if (x > 0.0)
      rep.worst_sqrt_margin = std::min(rep.worst_sqrt_margin, margin);

    const double u = draw(k);
    const double h = (2.0 * u + 4.0) * (xlogx(u) - u + 1.0) - 3.0 * (u - 1.0) * (u - 1.0);
    rep.worst_pinsker_margin = std::min(rep.worst_pinsker_margin, h);
  }
  rep.passed = rep.worst_product_margin >= -1e-12 && rep.worst_sqrt_margin >= -1e-12 &&
               rep.worst_pinsker_margin >= -1e-12;
  return rep;
}

DecayFit fit_exponential_decay(std::span<const double> times, std::span<const double> values,
                               double window_fraction, double floor) {
  if (times.size() != values.size())
    throw ValidationError("fit_exponential_decay: length mismatch");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw ValidationError("fit_exponential_decay: window_fraction must be in (0,1]");

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::isfinite(values[i]) && values[i] > floor) usable.push_back(i);
  const std::size_t take =
      static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(usable.size())));
  if (take < 10)
    throw InsufficientData("fit_exponential_decay: fewer than 10 samples above the floor");
  const std::size_t first = usable.size() - take;

  double st = 0.0, sv = 0.0;
  for (std::size_t k = first; k < usable.size(); ++k) {
    st += times[usable[k]];
    sv += std::log(values[usable[k]]);
  }
  const double mt = st / static_cast<double>(take);
  const double mv = sv / static_cast<double>(take);
  double stt = 0.0, stv = 0.0, svv = 0.0;
  for (std::size_t k = first; k < usable.size(); ++k) {
    const double dt = times[usable[k]] - mt;
    const double dv = std::log(values[usable[k]]) - mv;
    stt += dt * dt;
    stv += dt * dv;
    svv += dv * dv;
  }
  if (stt == 0.0) throw InsufficientData("fit_exponential_decay: degenerate time window");

  DecayFit fit;
  const double slope = stv / stt;
  fit.rate = -slope;
  fit.intercept = mv - slope * mt;
  const double ss_res = std::max(0.0, svv - slope * stv);
  fit.r_squared = (svv > 0.0) ? 1.0 - ss_res / svv : 1.0;
  fit.window_lo = times[usable[first]];
  fit.window_hi = times[usable.back()];
  fit.samples_used = take;
  return fit;
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> relative_entropy,
                        double window_fraction) {
  double scale = 1.0;
  for (double v : relative_entropy)
    if (std::isfinite(v)) {
      scale = std::max(1.0, v);
      break;
    }
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * scale;
  return fit_exponential_decay(times, relative_entropy, window_fraction, floor);
}

EntropyReport make_entropy_report(const State& state, const EquilibriumState& eq,
                                  const Grid& grid, const MaterialFields& fields,
                                  const ModelParams& params) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  EntropyReport rep;
  rep.entropy = entropy(state, grid, fields, params);
  rep.relative_entropy = relative_entropy(state, eq, grid, fields, params);
  rep.production = entropy_production(state, grid, fields, params);

  std::vector<double> charge(n);
  for (std::size_t i = 0; i < n; ++i)
    charge[i] = state.n[i] - state.p[i] + params.eps * state.n_tr[i];
  rep.charge = cell_average(grid, charge);

  const Norms nn = discrete_norms(grid, state.n, eq.n_inf);
  const Norms np = discrete_norms(grid, state.p, eq.p_inf);
  const Norms ntr = discrete_norms(grid, state.n_tr, eq.ntr_inf);
  const Norms npsi = discrete_norms(grid, state.psi, eq.psi_inf);
  rep.l1_n = nn.l1;
  rep.l1_p = np.l1;
  rep.linf_n = nn.linf;
  rep.linf_p = np.linf;
  rep.linf_ntr = ntr.linf;
  rep.h1_psi = npsi.h1_semi;

  // H2 proxy: l2 norm of the discrete Laplacian of psi - psi_inf plus the H1 seminorm.
  std::vector<double> dpsi(n);
  for (std::size_t i = 0; i < n; ++i) dpsi[i] = state.psi[i] - eq.psi_inf[i];
  const NeumannLaplacian lap(grid);
  const std::vector<double> ld = lap.apply(dpsi);
  double lap_l2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = ld[i] / grid.cell_volume;
    lap_l2 += v * v;
  }
  rep.h2proxy_psi = std::sqrt(lap_l2 * grid.cell_volume) + npsi.h1_semi;

  rep.min_n = *std::min_element(state.n.begin(), state.n.end());
  rep.min_p = *std::min_element(state.p.begin(), state.p.end());
  rep.min_ntr = *std::min_element(state.n_tr.begin(), state.n_tr.end());
  rep.max_ntr = *std::max_element(state.n_tr.begin(), state.n_tr.end());
  return rep;
}

} // namespace trapflow
