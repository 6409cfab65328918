#pragma once

#include <trapflow/core.hpp>

#include <span>
#include <vector>

namespace trapflow {

enum class Channel { electron, hole };

/// Exponential-fitting kernel B(x) = x / (e^x - 1), continuously extended by
/// B(0) = 1. Satisfies B(-x) = B(x) e^x; B(x) -> 0 for x -> +inf and
/// B(x) ~ -x for x -> -inf.
double bernoulli(double x);

/// Per-face drops of the channel potential phi = psi + V_n (electrons) or
/// phi = -psi + V_p (holes): delta_f = phi_R - phi_L. Antisymmetric under
/// orientation reversal by construction.
std::vector<double> edge_potentials(const Grid& grid, std::span<const double> phi);

/// Channel potential phi at cell centers.
std::vector<double> channel_potential(Channel ch, const MaterialFields& fields,
                                      std::span<const double> psi);

/// Scharfetter-Gummel face flux oriented left -> right, before the conductance
/// factor: G = B(delta) n_L - B(-delta) n_R. Vanishes exactly on discrete
/// Gibbs states n = c e^{-phi}.
double sg_edge_flux(double n_left, double n_right, double delta);

/// One implicit Euler transport substep with frozen potential:
/// solves (vol/dt) I u+ + T(phi) u+ = (vol/dt) u by banded LU.
/// The assembled matrix is an M-matrix, so the output is nonnegative and the
/// total mass sum(u * vol) is conserved to solver accuracy.
std::vector<double> transport_substep(const Grid& grid, const MaterialFields& fields,
                                      Channel ch, std::span<const double> density,
                                      std::span<const double> psi, double dt);

} // namespace trapflow
