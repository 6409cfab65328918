#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trapflow {

/// Square banded matrix with equal lower/upper bandwidth, dense-in-band storage.
/// Row i holds entries for columns i-bw .. i+bw. Used for the transport
/// substep (nonsymmetric M-matrix, LU without pivoting) and the equilibrium
/// Newton systems (SPD, Cholesky).
class BandedMatrix {
public:
  BandedMatrix(int n, int bandwidth);

  int size() const { return n_; }
  int bandwidth() const { return bw_; }

  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * stride_ + (j - i + bw_)]; }
  double at(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * stride_ + (j - i + bw_)];
  }

  void set_zero();

  /// y = A x for the unfactored matrix.
  std::vector<double> multiply(std::span<const double> x) const;

  /// In-place LU without pivoting. Stable for the column-diagonally-dominant
  /// M-matrices assembled here. Throws NonConvergence on a vanishing pivot.
  void factor_lu();
  /// Solves A x = b after factor_lu(). For M-matrices the factor signs make the
  /// solution of a nonnegative right-hand side nonnegative in floating point.
  std::vector<double> solve_lu(std::span<const double> b) const;

  /// In-place Cholesky A = L L^T. Throws NonConvergence if a pivot is not
  /// strictly positive, i.e. the matrix is not SPD.
  void factor_cholesky();
  std::vector<double> solve_cholesky(std::span<const double> b) const;

private:
  int n_;
  int bw_;
  std::size_t stride_;
  std::vector<double> a_;
};

} // namespace trapflow
