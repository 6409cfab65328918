#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace trapflow {

/// Scalar model parameters. All strictly positive; eps <= eps0.
struct ModelParams {
  double n0 = 1.0;     ///< electron reference density
  double p0 = 1.0;     ///< hole reference density
  double tau_n = 1.0;  ///< electron relaxation time
  double tau_p = 1.0;  ///< hole relaxation time
  double eps = 1e-2;   ///< trap lifetime / density of trapped states
  double eps0 = 1.0;   ///< upper bound for eps used in sweeps
  double lambda = 1.0; ///< Debye-type constant in Poisson's equation

  /// Throws ValidationError if any constraint is violated.
  void validate() const;
};

/// One interior face between two cells, flux-oriented left -> right.
struct Face {
  int left = 0;
  int right = 0;
  double area = 0.0;        ///< codimension-1 measure of the face
  double dist = 0.0;        ///< distance between the adjacent cell centers
  double conductance = 0.0; ///< area / dist
};

/// Uniform cell-centered grid on the unit interval (dim 1) or unit square (dim 2).
/// Total volume is 1 by construction. Boundary faces carry no flux unknowns,
/// so the no-flux closure is encoded by their absence from `faces`.
struct Grid {
  int dim = 1;
  std::array<int, 2> cells_per_axis = {1, 1}; ///< {nx, 1} in 1D, {nx, ny} in 2D
  int num_cells = 1;
  double cell_volume = 1.0;
  std::vector<Face> faces;
  std::vector<double> center_x; ///< per-cell center coordinates
  std::vector<double> center_y; ///< all 0.5 in 1D

  int nx() const { return cells_per_axis[0]; }
  int ny() const { return cells_per_axis[1]; }
};

/// Per-cell material data. mu_n/mu_p are always exp(-v_n)/exp(-v_p); the
/// builder is the single place where they are computed.
struct MaterialFields {
  std::vector<double> doping;
  std::vector<double> v_n;
  std::vector<double> v_p;
  std::vector<double> mu_n;
  std::vector<double> mu_p;
};

/// Carrier densities, trap occupancy and self-consistent potential at one time.
struct State {
  double t = 0.0;
  std::vector<double> n;
  std::vector<double> p;
  std::vector<double> n_tr;
  std::vector<double> psi;
};

/// Diagnostics for one time sample.
struct EntropyReport {
  double entropy = 0.0;          ///< E
  double relative_entropy = 0.0; ///< E - E_inf
  double production = 0.0;       ///< P (+inf sentinel when a log term degenerates)
  double charge = 0.0;           ///< mean(n - p + eps * n_tr)
  double l1_n = 0.0, l1_p = 0.0;
  double linf_n = 0.0, linf_p = 0.0, linf_ntr = 0.0;
  double h1_psi = 0.0;
  double h2proxy_psi = 0.0; ///< l2 of the discrete Laplacian of psi - psi_inf plus h1 seminorm
  double min_n = 0.0, min_p = 0.0, min_ntr = 0.0, max_ntr = 0.0;
};

/// Builds a uniform grid with |Omega| = 1. dim must be 1 or 2, each axis >= 2 cells.
Grid build_grid(int dim, std::span<const int> cells_per_axis);

/// Convenience overloads.
Grid build_grid_1d(int nx);
Grid build_grid_2d(int nx, int ny);

MaterialFields make_fields(const Grid& grid, std::vector<double> doping,
                           std::vector<double> v_n, std::vector<double> v_p);

/// Integral of a piecewise-constant cell field over Omega; equals the average
/// since |Omega| = 1.
double cell_average(const Grid& grid, std::span<const double> f);

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double h1_semi = 0.0;
};

/// Discrete norms of f - g: volume-weighted l1/l2, max-norm, and the
/// two-point H1 seminorm sqrt(sum_faces conductance * (d_R - d_L)^2).
Norms discrete_norms(const Grid& grid, std::span<const double> f, std::span<const double> g);

/// State sanity check: sizes match the grid, n,p >= 0, n_tr in [0,1].
void validate_state(const Grid& grid, const State& state);

} // namespace trapflow
