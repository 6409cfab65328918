#include <trapflow/banded.hpp>

#include <trapflow/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace trapflow {

BandedMatrix::BandedMatrix(int n, int bandwidth)
    : n_(n), bw_(bandwidth), stride_(2 * static_cast<std::size_t>(bandwidth) + 1),
      a_(static_cast<std::size_t>(n) * stride_, 0.0) {
  if (n < 1 || bandwidth < 0 || bandwidth >= n)
    throw ValidationError("banded matrix: invalid dimensions");
}

void BandedMatrix::set_zero() { std::fill(a_.begin(), a_.end(), 0.0); }

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i) {
    const int jlo = std::max(0, i - bw_);
    const int jhi = std::min(n_ - 1, i + bw_);
    double s = 0.0;
    for (int j = jlo; j <= jhi; ++j) s += at(i, j) * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

void BandedMatrix::factor_lu() {
  for (int k = 0; k < n_; ++k) {
    const double pivot = at(k, k);
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw NonConvergence("banded LU: zero pivot at row " + std::to_string(k), pivot);
    const int ilo = std::min(n_ - 1, k + bw_);
    for (int i = k + 1; i <= ilo; ++i) {
      const double l = at(i, k) / pivot;
      at(i, k) = l;
      if (l != 0.0) {
        const int jhi = std::min(n_ - 1, k + bw_);
        for (int j = k + 1; j <= jhi; ++j) at(i, j) -= l * at(k, j);
      }
    }
  }
}

std::vector<double> BandedMatrix::solve_lu(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  for (int i = 0; i < n_; ++i) {
    const int jlo = std::max(0, i - bw_);
    double s = x[static_cast<std::size_t>(i)];
    for (int j = jlo; j < i; ++j) s -= at(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s;
  }
  for (int i = n_ - 1; i >= 0; --i) {
    const int jhi = std::min(n_ - 1, i + bw_);
    double s = x[static_cast<std::size_t>(i)];
    for (int j = i + 1; j <= jhi; ++j) s -= at(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  return x;
}

void BandedMatrix::factor_cholesky() {
  for (int k = 0; k < n_; ++k) {
    double d = at(k, k);
    const int jlo = std::max(0, k - bw_);
    for (int j = jlo; j < k; ++j) d -= at(k, j) * at(k, j);
    if (!(d > 0.0))
      throw NonConvergence("banded Cholesky: matrix not SPD at row " + std::to_string(k), d);
    const double l = std::sqrt(d);
    at(k, k) = l;
    const int ihi = std::min(n_ - 1, k + bw_);
    for (int i = k + 1; i <= ihi; ++i) {
      double s = at(i, k);
      const int mlo = std::max({0, i - bw_, k - bw_});
      for (int m = mlo; m < k; ++m) s -= at(i, m) * at(k, m);
      at(i, k) = s / l;
    }
  }
}

std::vector<double> BandedMatrix::solve_cholesky(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  for (int i = 0; i < n_; ++i) {
    const int jlo = std::max(0, i - bw_);
    double s = x[static_cast<std::size_t>(i)];
    for (int j = jlo; j < i; ++j) s -= at(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  for (int i = n_ - 1; i >= 0; --i) {
    const int jhi = std::min(n_ - 1, i + bw_);
    double s = x[static_cast<std::size_t>(i)];
    for (int j = i + 1; j <= jhi; ++j) s -= at(j, i) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  return x;
}

} // namespace trapflow
