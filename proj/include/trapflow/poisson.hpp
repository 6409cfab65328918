#pragma once

#include <trapflow/core.hpp>

#include <optional>
#include <span>
#include <vector>

namespace trapflow {

/// Two-point-flux finite-volume Laplacian with no-flux faces. Symmetric
/// positive semidefinite; kernel is exactly the constant vector. apply()
/// returns the integrated form: (L u)_i = sum_{faces at i} conductance * (u_i - u_j).
class NeumannLaplacian {
public:
  explicit NeumannLaplacian(const Grid& grid) : grid_(&grid) {}

  const Grid& grid() const { return *grid_; }

  void apply(std::span<const double> u, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> u) const;

  /// Dirichlet form u^T L u = sum_faces conductance * (u_R - u_L)^2.
  double dirichlet_form(std::span<const double> u) const;

private:
  const Grid* grid_;
};

NeumannLaplacian assemble_laplacian(const Grid& grid);

struct PoissonOptions {
  double tol = 1e-12;            ///< relative l2 residual target
  int max_iters = 0;             ///< 0 = 50 * num_cells
  bool project_rhs = false;      ///< subtract the mean of f instead of rejecting it
  std::optional<std::span<const double>> initial_guess; ///< warm start
};

/// Solves lambda * (-Delta_h) psi = f with homogeneous Neumann closure and the
/// zero-mean normalization, by conjugate gradients on the zero-mean subspace.
/// The compatibility condition |mean(f)| <= 1e-10 * (1 + ||f||_l1) is enforced
/// unless project_rhs is set. Throws CompatibilityViolation / NonConvergence.
std::vector<double> solve_poisson(const NeumannLaplacian& op, std::span<const double> f,
                                  double lambda, const PoissonOptions& opts = {});

} // namespace trapflow
