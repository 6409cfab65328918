#include <trapflow/core.hpp>

#include <trapflow/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace trapflow {

void ModelParams::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError(std::string("model.") + name + " must be finite and > 0");
  };
  require_positive(n0, "n0");
  require_positive(p0, "p0");
  require_positive(tau_n, "tau_n");
  require_positive(tau_p, "tau_p");
  require_positive(eps, "eps");
  require_positive(eps0, "eps0");
  require_positive(lambda, "lambda");
  if (eps > eps0) throw ValidationError("model.eps must satisfy eps <= eps0");
}

Grid build_grid(int dim, std::span<const int> cells_per_axis) {
  if (dim != 1 && dim != 2)
    throw ValidationError("grid.dim must be 1 or 2, got " + std::to_string(dim));
  if (static_cast<int>(cells_per_axis.size()) != dim)
    throw ValidationError("grid.cells must list one entry per axis");
  for (int c : cells_per_axis)
    if (c < 2) throw ValidationError("grid.cells entries must be >= 2");

  Grid g;
  g.dim = dim;
  const int nx = cells_per_axis[0];
  const int ny = (dim == 2) ? cells_per_axis[1] : 1;
  g.cells_per_axis = {nx, ny};
  g.num_cells = nx * ny;

  // Unit interval / unit square, so |Omega| = 1 holds exactly.
  const double hx = 1.0 / nx;
  const double hy = (dim == 2) ? 1.0 / ny : 1.0;
  g.cell_volume = hx * hy;

  g.center_x.resize(g.num_cells);
  g.center_y.resize(g.num_cells);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int id = j * nx + i;
      g.center_x[id] = (i + 0.5) * hx;
      g.center_y[id] = (dim == 2) ? (j + 0.5) * hy : 0.5;
    }
  }

  // Interior faces only; each listed once, oriented low index -> high index.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      Face f;
      f.left = j * nx + i;
      f.right = j * nx + i + 1;
      f.area = hy;
      f.dist = hx;
      f.conductance = f.area / f.dist;
      g.faces.push_back(f);
    }
  }
  if (dim == 2) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        Face f;
        f.left = j * nx + i;
        f.right = (j + 1) * nx + i;
        f.area = hx;
        f.dist = hy;
        f.conductance = f.area / f.dist;
        g.faces.push_back(f);
      }
    }
  }
  return g;
}

Grid build_grid_1d(int nx) {
  const int cells[1] = {nx};
  return build_grid(1, cells);
}

Grid build_grid_2d(int nx, int ny) {
  const int cells[2] = {nx, ny};
  return build_grid(2, cells);
}

MaterialFields make_fields(const Grid& grid, std::vector<double> doping,
                           std::vector<double> v_n, std::vector<double> v_p) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  if (doping.size() != n || v_n.size() != n || v_p.size() != n)
    throw ValidationError("material fields must have one entry per cell");
  MaterialFields f;
  f.doping = std::move(doping);
  f.v_n = std::move(v_n);
  f.v_p = std::move(v_p);
  f.mu_n.resize(n);
  f.mu_p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.mu_n[i] = std::exp(-f.v_n[i]);
    f.mu_p[i] = std::exp(-f.v_p[i]);
  }
  return f;
}

double cell_average(const Grid& grid, std::span<const double> f) {
  if (f.size() != static_cast<std::size_t>(grid.num_cells))
    throw ValidationError("cell_average: field length does not match grid");
  double s = 0.0;
  for (double v : f) s += v;
  return s * grid.cell_volume;
}

Norms discrete_norms(const Grid& grid, std::span<const double> f, std::span<const double> g) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  if (f.size() != n || g.size() != n)
    throw ValidationError("discrete_norms: field lengths do not match grid");
  Norms out;
  double sum1 = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f[i] - g[i];
    sum1 += std::abs(d);
    sum2 += d * d;
    out.linf = std::max(out.linf, std::abs(d));
  }
  out.l1 = sum1 * grid.cell_volume;
  out.l2 = std::sqrt(sum2 * grid.cell_volume);
  double h1 = 0.0;
  for (const Face& face : grid.faces) {
    const double d = (f[face.right] - g[face.right]) - (f[face.left] - g[face.left]);
    h1 += face.conductance * d * d;
  }
  out.h1_semi = std::sqrt(h1);
  return out;
}

void validate_state(const Grid& grid, const State& state) {
  const auto n = static_cast<std::size_t>(grid.num_cells);
  if (state.n.size() != n || state.p.size() != n || state.n_tr.size() != n ||
      state.psi.size() != n)
    throw ValidationError("state arrays must have one entry per cell");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(state.n[i] >= 0.0)) throw ValidationError("state.n must be nonnegative");
    if (!(state.p[i] >= 0.0)) throw ValidationError("state.p must be nonnegative");
    if (!(state.n_tr[i] >= 0.0 && state.n_tr[i] <= 1.0))
      throw ValidationError("state.n_tr must lie in [0,1]");
  }
}

} // namespace trapflow
