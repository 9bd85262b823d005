#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace nfpe {

/// Tridiagonal system; row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1].
/// lower[0] and upper[n-1] are ignored.
struct TridiagonalSystem {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit TridiagonalSystem(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  std::size_t size() const noexcept { return diag.size(); }

  void add(std::size_t row, std::size_t col, double value) {
    if (col == row) {
      diag[row] += value;
    } else if (col + 1 == row) {
      lower[row] += value;
    } else if (col == row + 1) {
      upper[row] += value;
    } else {
      throw std::out_of_range("entry outside the tridiagonal band");
    }
  }

  /// Thomas algorithm (no pivoting; intended for diagonally dominant M-matrices).
  std::vector<double> solve(std::span<const double> rhs) const {
    const std::size_t n = size();
    std::vector<double> c(n), d(n);
    double denom = diag[0];
    c[0] = n > 1 ? upper[0] / denom : 0.0;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = diag[i] - lower[i] * c[i - 1];
      c[i] = i + 1 < n ? upper[i] / denom : 0.0;
      d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  }
};

}  // namespace nfpe
