#include <trapflow/transport.hpp>

#include <trapflow/banded.hpp>
#include <trapflow/errors.hpp>

#include <cmath>

namespace trapflow {

double bernoulli(double x) {
  if (x == 0.0) return 1.0;
  // expm1 keeps the quotient accurate through the removable singularity and
  // the asymptotic branches: x/expm1(x) -> 0 for x -> +inf, -> -x for x -> -inf.
  return x / std::expm1(x);
}

std::vector<double> edge_potentials(const Grid& grid, std::span<const double> phi) {
  std::vector<double> delta(grid.faces.size());
  for (std::size_t k = 0; k < grid.faces.size(); ++k)
    delta[k] = phi[grid.faces[k].right] - phi[grid.faces[k].left];
  return delta;
}

std::vector<double> channel_potential(Channel ch, const MaterialFields& fields,
                                      std::span<const double> psi) {
  std::vector<double> phi(psi.size());
  if (ch == Channel::electron) {
    for (std::size_t i = 0; i < psi.size(); ++i) phi[i] = psi[i] + fields.v_n[i];
  } else {
    for (std::size_t i = 0; i < psi.size(); ++i) phi[i] = -psi[i] + fields.v_p[i];
  }
  return phi;
}

double sg_edge_flux(double n_left, double n_right, double delta) {
  return bernoulli(delta) * n_left - bernoulli(-delta) * n_right;
}

std::vector<double> transport_substep(const Grid& grid, const MaterialFields& fields,
                                      Channel ch, std::span<const double> density,
                                      std::span<const double> psi, double dt) {
  if (!(dt > 0.0)) throw ValidationError("transport_substep: dt must be > 0");
  const auto n = static_cast<std::size_t>(grid.num_cells);
  if (density.size() != n || psi.size() != n)
    throw ValidationError("transport_substep: field length does not match grid");

  const std::vector<double> phi = channel_potential(ch, fields, psi);

  int bw = 0;
  for (const Face& f : grid.faces) bw = std::max(bw, f.right - f.left);
  BandedMatrix A(grid.num_cells, bw);
  for (int i = 0; i < grid.num_cells; ++i) A.at(i, i) = grid.cell_volume / dt;
  for (const Face& f : grid.faces) {
    const double delta = phi[f.right] - phi[f.left];
    const double bl = bernoulli(delta);  // weight of the left (upwind) density
    const double br = bernoulli(-delta); // weight of the right density
    A.at(f.left, f.left) += f.conductance * bl;
    A.at(f.left, f.right) -= f.conductance * br;
    A.at(f.right, f.right) += f.conductance * br;
    A.at(f.right, f.left) -= f.conductance * bl;
  }

  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = density[i] * grid.cell_volume / dt;

  A.factor_lu();
  return A.solve_lu(rhs);
}

} // namespace trapflow
