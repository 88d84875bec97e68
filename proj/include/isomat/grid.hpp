#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

// Core grid type and the scalar functionals defined on it.
//
// A grid matrix is an n1 x n2 real matrix; entry (i,j) is indexed 0-based in
// code, 1-based in prose. Storage is row-major so that rows are contiguous
// and CSV interchange (one line per row) is a flat copy.

namespace isomat {

using GridMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Absolute tolerance used by default when testing monotonicity.
inline constexpr double kIsoTol = 1e-9;

// Thrown when an exact/enumeration routine is asked to exceed its size cap.
struct SizeCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an iterative solver fails to converge and the caller asked for
// the failure to be fatal (e.g. per-block projections, simulation budgets).
struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Derived>
bool is_valid_grid(const Eigen::MatrixBase<Derived>& m) {
  return m.rows() >= 1 && m.cols() >= 1 && m.allFinite();
}

template <typename Derived>
void require_valid_grid(const Eigen::MatrixBase<Derived>& m, const char* what = "grid matrix") {
  if (!is_valid_grid(m)) {
    throw std::invalid_argument(std::string(what) + ": must be nonempty with finite entries");
  }
}

// True iff m is nondecreasing along every row and every column, up to an
// absolute slack `tol`. Checking adjacent pairs suffices by transitivity.
template <typename Derived>
bool is_isotonic(const Eigen::MatrixBase<Derived>& m, double tol = kIsoTol) {
  const Eigen::Index n1 = m.rows(), n2 = m.cols();
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j + 1 < n2; ++j) {
      if (m(i, j) > m(i, j + 1) + tol) return false;
    }
  }
  for (Eigen::Index j = 0; j < n2; ++j) {
    for (Eigen::Index i = 0; i + 1 < n1; ++i) {
      if (m(i, j) > m(i + 1, j) + tol) return false;
    }
  }
  return true;
}

// Per-entry squared loss: (1/n) * sum_ij (a_ij - b_ij)^2.
template <typename DerivedA, typename DerivedB>
double squared_loss(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("squared_loss: dimension mismatch");
  }
  const double n = static_cast<double>(a.rows() * a.cols());
  return (a - b).squaredNorm() / n;
}

// Squared range D(m) = (m_{n1,n2} - m_{1,1})^2.
template <typename Derived>
double range_D(const Eigen::MatrixBase<Derived>& m) {
  require_valid_grid(m);
  const double d = m(m.rows() - 1, m.cols() - 1) - m(0, 0);
  return d * d;
}

// Entrywise variance around the grand mean: V(m) = (1/n) sum (m_ij - mean)^2.
// V(m) <= D(m) whenever m is isotonic.
template <typename Derived>
double variance_V(const Eigen::MatrixBase<Derived>& m) {
  require_valid_grid(m);
  const double n = static_cast<double>(m.rows() * m.cols());
  const double mean = m.sum() / n;
  return (m.array() - mean).matrix().squaredNorm() / n;
}

// Number of distinct entry values, where values connected by a chain of gaps
// each <= tol are identified. With tol = 0 this is the exact distinct count.
// Chain merging keeps the count stable under solver-level floating noise.
template <typename Derived>
int distinct_count_c(const Eigen::MatrixBase<Derived>& m, double tol = 0.0) {
  require_valid_grid(m);
  if (tol < 0) throw std::invalid_argument("distinct_count_c: tol must be nonnegative");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  }
  std::sort(v.begin(), v.end());
  int classes = 1;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] - v[i - 1] > tol) ++classes;
  }
  return classes;
}

inline GridMatrix transpose_grid(const GridMatrix& m) {
  return m.transpose();
}

}  // namespace isomat
