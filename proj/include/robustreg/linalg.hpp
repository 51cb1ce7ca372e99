#pragma once

#include "robustreg/types.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace robustreg {

// Weighted least squares via column-pivoted QR of the sqrt(w)-scaled system.
// Rank is judged against a relative diagonal tolerance of 1e-12.
inline Vector wls_solve(const Matrix& design, const Vector& y,
                        const Vector& w) {
  const int n = static_cast<int>(design.rows());
  const int p = static_cast<int>(design.cols());
  Vector sw(n);
  for (int i = 0; i < n; ++i) {
    if (!(w(i) >= 0.0) || !std::isfinite(w(i)))
      throw FitError("wls_solve: invalid weight at row " + std::to_string(i + 1));
    sw(i) = std::sqrt(w(i));
  }
  Matrix a = sw.asDiagonal() * design;
  Vector b = sw.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < p) {
    // Columns permuted by pivoting; the ones past `rank` are the dependents.
    const auto& perm = qr.colsPermutation().indices();
    const int bad = perm(qr.rank());
    throw FitError("wls_solve: rank-deficient system (column " +
                   std::to_string(bad + 1) + " of the design is dependent)");
  }
  return qr.solve(b);
}

inline Vector wls_solve(const Dataset& d, const Vector& w) {
  return wls_solve(d.design(), d.y(), w);
}

// Leverages h_i = x_i' (X'X)^-1 x_i via the thin Q factor: h_i = ||Q_i.||^2.
inline Vector hat_diagonals(const Matrix& design) {
  const int n = static_cast<int>(design.rows());
  const int p = static_cast<int>(design.cols());
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < p) throw FitError("hat_diagonals: rank-deficient design");
  Matrix thin_q = qr.householderQ() * Matrix::Identity(n, p);
  return thin_q.rowwise().squaredNorm();
}

inline Vector hat_diagonals(const Dataset& d) { return hat_diagonals(d.design()); }

// k is 1-based; the value that would occupy position k in ascending order.
inline double kth_smallest(std::vector<double> v, int k) {
  if (k < 1 || k > static_cast<int>(v.size()))
    throw std::out_of_range("kth_smallest: k=" + std::to_string(k) +
                            " outside 1.." + std::to_string(v.size()));
  std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
  return v[static_cast<size_t>(k - 1)];
}

// Odd n: middle order statistic; even n: mean of the two middle ones.
inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  const size_t n = v.size();
  const size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

inline std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace robustreg
