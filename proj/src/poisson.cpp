#include <trapflow/poisson.hpp>

#include <trapflow/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace trapflow {

void NeumannLaplacian::apply(std::span<const double> u, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Face& f : grid_->faces) {
    const double t = f.conductance * (u[f.left] - u[f.right]);
    out[f.left] += t;
    out[f.right] -= t;
  }
}

std::vector<double> NeumannLaplacian::apply(std::span<const double> u) const {
  std::vector<double> out(u.size());
  apply(u, out);
  return out;
}

double NeumannLaplacian::dirichlet_form(std::span<const double> u) const {
  double s = 0.0;
  for (const Face& f : grid_->faces) {
    const double d = u[f.right] - u[f.left];
    s += f.conductance * d * d;
  }
  return s;
}

NeumannLaplacian assemble_laplacian(const Grid& grid) { return NeumannLaplacian(grid); }

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void remove_mean(std::span<double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

} // namespace

std::vector<double> solve_poisson(const NeumannLaplacian& op, std::span<const double> f,
                                  double lambda, const PoissonOptions& opts) {
  const Grid& grid = op.grid();
  const auto n = static_cast<std::size_t>(grid.num_cells);
  if (f.size() != n) throw ValidationError("solve_poisson: field length does not match grid");
  if (!(lambda > 0.0)) throw ValidationError("solve_poisson: lambda must be > 0");

  double fbar = 0.0, fabs1 = 0.0;
  for (double v : f) {
    fbar += v;
    fabs1 += std::abs(v);
  }
  fbar *= grid.cell_volume;
  fabs1 *= grid.cell_volume;
  if (!opts.project_rhs) {
    const double compat_tol = 1e-10 * (1.0 + fabs1);
    if (std::abs(fbar) > compat_tol)
      throw CompatibilityViolation("solve_poisson: mean(f) = " + std::to_string(fbar) +
                                   " exceeds compatibility tolerance");
  }

  // Integrated right-hand side, projected onto the zero-sum subspace so the
  // kernel component (constants) never enters the iteration.
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = f[i] * grid.cell_volume;
  remove_mean(b);

  const double bnorm = std::sqrt(dot(b, b));
  std::vector<double> psi(n, 0.0);
  if (opts.initial_guess) {
    const auto& guess = *opts.initial_guess;
    if (guess.size() == n) std::copy(guess.begin(), guess.end(), psi.begin());
    remove_mean(psi);
  }
  if (bnorm == 0.0) {
    std::fill(psi.begin(), psi.end(), 0.0);
    return psi;
  }

  std::vector<double> r(n), q(n);
  op.apply(psi, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - lambda * r[i];
  remove_mean(r);
  std::vector<double> d = r;

  const double target = std::max(opts.tol * bnorm, 1e-300);
  const int max_iters = opts.max_iters > 0 ? opts.max_iters : 50 * grid.num_cells;
  double rho = dot(r, r);
  int iter = 0;
  while (std::sqrt(rho) > target) {
    if (++iter > max_iters)
      throw NonConvergence("solve_poisson: CG stalled after " + std::to_string(max_iters) +
                               " iterations",
                           std::sqrt(rho) / bnorm);
    op.apply(d, q);
    for (std::size_t i = 0; i < n; ++i) q[i] *= lambda;
    const double dq = dot(d, q);
    if (!(dq > 0.0))
      throw NonConvergence("solve_poisson: loss of positive definiteness", std::sqrt(rho));
    const double alpha = rho / dq;
    for (std::size_t i = 0; i < n; ++i) {
      psi[i] += alpha * d[i];
      r[i] -= alpha * q[i];
    }
    remove_mean(r);
    const double rho_next = dot(r, r);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
  }

  // Normalize to zero volume-weighted mean.
  const double mean = cell_average(grid, psi);
  for (double& v : psi) v -= mean;
  return psi;
}

} // namespace trapflow
