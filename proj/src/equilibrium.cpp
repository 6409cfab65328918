#include <trapflow/equilibrium.hpp>

#include <trapflow/banded.hpp>
#include <trapflow/errors.hpp>
#include <trapflow/poisson.hpp>
#include <trapflow/reactions.hpp>
#include <trapflow/transport.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace trapflow {

State EquilibriumState::as_state() const {
  State s;
  s.t = 0.0;
  s.n = n_inf;
  s.p = p_inf;
  s.n_tr = ntr_inf;
  s.psi = psi_inf;
  return s;
}

namespace {

// ln(1 + n0 e^y) without overflow for large y.
double log1p_exp(double n0, double y) {
  if (y > 35.0) return y + std::log(n0 + std::exp(-y));
  return std::log1p(n0 * std::exp(y));
}

struct Nonlinearity {
  double n0, p0, eps;

  double value(double y, double vn, double vp) const {
    return -std::exp(-y - vn) + n0 * p0 * std::exp(y - vp) - eps / (1.0 + n0 * std::exp(y));
  }
  double derivative(double y, double vn, double vp) const {
    const double e = n0 * std::exp(y);
    const double q = 1.0 + e;
    return std::exp(-y - vn) + n0 * p0 * std::exp(y - vp) + eps * e / (q * q);
  }
  // Antiderivative of value(); the convex per-cell energy density.
  double energy(double y, double vn, double vp) const {
    return std::exp(-y - vn) + n0 * p0 * std::exp(y - vp) + eps * (log1p_exp(n0, y) - y);
  }
};

} // namespace

EquilibriumState solve_equilibrium(const Grid& grid, const MaterialFields& fields,
                                   const ModelParams& params, const EquilibriumOptions& opts) {
  params.validate();
  const auto n = static_cast<std::size_t>(grid.num_cells);
  const NeumannLaplacian lap(grid);
  const Nonlinearity f{params.n0, params.p0, params.eps};
  const double lambda = params.lambda;
  const double vol = grid.cell_volume;

  std::vector<double> w(n, 0.0);

  auto residual = [&](const std::vector<double>& y, std::vector<double>& out) {
    lap.apply(y, out);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = lambda * out[i] + vol * (f.value(y[i], fields.v_n[i], fields.v_p[i]) +
                                        fields.doping[i]);
  };
  auto energy = [&](const std::vector<double>& y) {
    double e = 0.5 * lambda * lap.dirichlet_form(y);
    for (std::size_t i = 0; i < n; ++i)
      e += vol * (f.energy(y[i], fields.v_n[i], fields.v_p[i]) + fields.doping[i] * y[i]);
    return e;
  };
  auto max_res = [&](const std::vector<double>& r) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m / vol; // per-volume normalization keeps the tolerance grid-independent
  };

  int bw = 0;
  for (const Face& face : grid.faces) bw = std::max(bw, face.right - face.left);

  std::vector<double> res(n);
  residual(w, res);
  EquilibriumState eq;
  eq.newton_residuals.push_back(max_res(res));

  int iter = 0;
  while (max_res(res) > opts.tol) {
    if (++iter > opts.max_iters) {
      std::ostringstream msg;
      msg << "solve_equilibrium: Newton residual " << max_res(res) << " above tol " << opts.tol
          << " after " << opts.max_iters << " iterations";
      throw NonConvergence(msg.str(), max_res(res));
    }

    BandedMatrix jac(grid.num_cells, bw);
    for (const Face& face : grid.faces) {
      jac.at(face.left, face.left) += lambda * face.conductance;
      jac.at(face.right, face.right) += lambda * face.conductance;
      jac.at(face.left, face.right) -= lambda * face.conductance;
      jac.at(face.right, face.left) -= lambda * face.conductance;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int ii = static_cast<int>(i);
      jac.at(ii, ii) += vol * f.derivative(w[i], fields.v_n[i], fields.v_p[i]);
    }
    jac.factor_cholesky(); // throws if the Newton matrix is not SPD

    const std::vector<double> step = jac.solve_cholesky(res);

    // Armijo backtracking on the convex energy; the descent slope is -res.step.
    // The slack term covers floating-point noise in the energy evaluation, so
    // full Newton steps are accepted once the iteration reaches its quadratic
    // regime near the minimum.
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope -= res[i] * step[i];
    const double e0 = energy(w);
    const double slack = 64.0 * 2.220446049250313e-16 * (1.0 + std::abs(e0));
    double alpha = 1.0;
    std::vector<double> trial(n);
    for (int back = 0;; ++back) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - alpha * step[i];
      if (energy(trial) <= e0 + 1e-4 * alpha * slope + slack) break;
      alpha *= 0.5;
      if (back >= 60)
        throw NonConvergence("solve_equilibrium: line search failed", max_res(res));
    }
    w = trial;
    residual(w, res);
    eq.newton_residuals.push_back(max_res(res));
  }

  const double mean_w = cell_average(grid, w);
  eq.n_star = std::exp(-mean_w);
  eq.p_star = params.n0 * params.p0 / eq.n_star;
  eq.psi_inf.resize(n);
  eq.n_inf.resize(n);
  eq.p_inf.resize(n);
  eq.ntr_inf.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double psi = w[i] - mean_w;
    eq.psi_inf[i] = psi;
    eq.n_inf[i] = eq.n_star * std::exp(-psi - fields.v_n[i]);
    eq.p_inf[i] = eq.p_star * std::exp(psi - fields.v_p[i]);
    eq.ntr_inf[i] = eq.n_star / (eq.n_star + params.n0 * std::exp(psi));
  }
  eq.residuals = equilibrium_residuals(eq, grid, fields, params);
  return eq;
}

EquilibriumResiduals equilibrium_residuals(const EquilibriumState& eq, const Grid& grid,
                                           const MaterialFields& fields,
                                           const ModelParams& params) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  EquilibriumResiduals r;

  const NeumannLaplacian lap(grid);
  std::vector<double> lp = lap.apply(eq.psi_inf);
  for (std::size_t i = 0; i < n; ++i) {
    const double rhs = eq.n_inf[i] - eq.p_inf[i] + params.eps * eq.ntr_inf[i] -
                       fields.doping[i];
    r.poisson_res = std::max(r.poisson_res,
                             std::abs(params.lambda * lp[i] / grid.cell_volume - rhs));
  }

  State s = eq.as_state();
  const ReactionRates rates = eval_reactions(s, params, fields);
  for (std::size_t i = 0; i < n; ++i) {
    r.rn_res = std::max(r.rn_res, std::abs(rates.r_n[i]));
    r.rp_res = std::max(r.rp_res, std::abs(rates.r_p[i]));
  }

  for (Channel ch : {Channel::electron, Channel::hole}) {
    const std::vector<double> phi = channel_potential(ch, fields, eq.psi_inf);
    const std::vector<double>& u = (ch == Channel::electron) ? eq.n_inf : eq.p_inf;
    for (const Face& face : grid.faces) {
      const double g = sg_edge_flux(u[face.left], u[face.right], phi[face.right] - phi[face.left]);
      r.flux_res = std::max(r.flux_res, std::abs(g));
    }
  }

  double avg_n = 0.0, avg_p = 0.0, avg_tr = 0.0, avg_d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    avg_n += std::exp(-eq.psi_inf[i] - fields.v_n[i]);
    avg_p += std::exp(eq.psi_inf[i] - fields.v_p[i]);
    avg_tr += eq.n_star / (eq.n_star + params.n0 * std::exp(eq.psi_inf[i]));
    avg_d += fields.doping[i];
  }
  const double v = grid.cell_volume;
  r.scalar_res = std::abs(eq.n_star * avg_n * v - eq.p_star * avg_p * v +
                          params.eps * avg_tr * v - avg_d * v);
  return r;
}

} // namespace trapflow
