#pragma once

#include <isomat/grid.hpp>
#include <isomat/lower_sets.hpp>
#include <isomat/partition.hpp>
#include <isomat/pava.hpp>

#include <limits>
#include <utility>
#include <vector>

// Matrix isotonic least squares: the Euclidean (Frobenius) projection of an
// observation matrix onto the cone
//
//     M = { m : m nondecreasing along every row and every column }.
//
// M is the intersection of the row cone (each row nondecreasing) and the
// column cone. Projecting onto either factor is a batch of independent
// vector PAVA fits, so we run Dykstra's alternating projections with the two
// factors. Plain cyclic projection would converge to a point of M but not to
// the projection; Dykstra's correction terms are what make the limit the
// exact projection.
//
//     p = q = 0; x = y
//     repeat: a = P_rows(x + p); p = (x + p) - a
//             x = P_cols(a + q); q = (a + q) - x
//
// Stopping: max abs entry change over one full cycle <= tol AND the scaled
// stationarity residual |<y - x, x>| / (1 + |y||x|) <= 100 tol. Entry change
// alone can stall on flat regions, so both are required.
//
// lse_oracle_minmax evaluates the closed-form min-max representation
//
//     theta_ij = min_{L : (i,j) in L} max_{U : (i,j) in U} mean(y over L & U)
//
// over all lower sets L and upper sets U, by exhaustive enumeration of
// staircase profiles. Whenever (i,j) lies in both L and U the intersection
// contains (i,j), so no empty-intersection average ever arises. Feasible for
// n1 + n2 <= 12 and used as the ground truth the iterative solver is checked
// against.

namespace isomat {

struct FitDiagnostics {
  long iterations = 0;
  double final_change = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
};

inline double kkt_residual(const GridMatrix& y, const GridMatrix& theta) {
  const double ip = ((y - theta).array() * theta.array()).sum();
  return std::abs(ip) / (1.0 + y.norm() * theta.norm());
}

inline void project_rows_inplace(GridMatrix& m, PavaScratch& scratch) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    pava_inplace(m.row(i).data(), nullptr, m.cols(), scratch);
  }
}

inline void project_cols_inplace(GridMatrix& m, PavaScratch& scratch, std::vector<double>& colbuf) {
  colbuf.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) colbuf[static_cast<std::size_t>(i)] = m(i, j);
    pava_inplace(colbuf.data(), nullptr, m.rows(), scratch);
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = colbuf[static_cast<std::size_t>(i)];
  }
}

// Projection onto the row cone: each row replaced by its PAVA fit.
inline GridMatrix project_rows(const GridMatrix& m) {
  require_valid_grid(m);
  GridMatrix out = m;
  PavaScratch scratch;
  project_rows_inplace(out, scratch);
  return out;
}

// Column analogue of project_rows.
inline GridMatrix project_cols(const GridMatrix& m) {
  require_valid_grid(m);
  GridMatrix out = m;
  PavaScratch scratch;
  std::vector<double> colbuf;
  project_cols_inplace(out, scratch, colbuf);
  return out;
}

inline constexpr double kLseTol = 1e-10;
inline constexpr long kLseMaxIter = 100000;

inline std::pair<GridMatrix, FitDiagnostics> lse_fit(const GridMatrix& y, double tol = kLseTol,
                                                     long max_iter = kLseMaxIter) {
  require_valid_grid(y, "lse_fit input");
  if (!(tol > 0)) throw std::invalid_argument("lse_fit: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("lse_fit: max_iter must be positive");

  PavaScratch scratch;
  // A single row or column is plain vector isotonic regression.
  if (y.rows() == 1 || y.cols() == 1) {
    GridMatrix out = y;
    if (y.rows() == 1) {
      pava_inplace(out.row(0).data(), nullptr, out.cols(), scratch);
    } else {
      std::vector<double> colbuf;
      project_cols_inplace(out, scratch, colbuf);
    }
    FitDiagnostics d{1, 0.0, kkt_residual(y, out), true};
    return {std::move(out), d};
  }

  GridMatrix x = y;
  GridMatrix row_corr = GridMatrix::Zero(y.rows(), y.cols());
  GridMatrix col_corr = GridMatrix::Zero(y.rows(), y.cols());
  GridMatrix t(y.rows(), y.cols()), prev(y.rows(), y.cols());
  std::vector<double> colbuf;

  FitDiagnostics diag;
  const double kkt_tol = 100.0 * tol;
  for (long iter = 1; iter <= max_iter; ++iter) {
    prev = x;
    t = x + row_corr;
    x = t;
    project_rows_inplace(x, scratch);
    row_corr = t - x;
    t = x + col_corr;
    x = t;
    project_cols_inplace(x, scratch, colbuf);
    col_corr = t - x;

    diag.iterations = iter;
    diag.final_change = (x - prev).cwiseAbs().maxCoeff();
    diag.kkt_residual = kkt_residual(y, x);
    if (diag.final_change <= tol && diag.kkt_residual <= kkt_tol) {
      diag.converged = true;
      break;
    }
  }
  return {std::move(x), diag};
}

inline constexpr int kOracleSizeCap = 12;  // n1 + n2

inline GridMatrix lse_oracle_minmax(const GridMatrix& y) {
  require_valid_grid(y, "lse_oracle_minmax input");
  const int n1 = static_cast<int>(y.rows());
  const int n2 = static_cast<int>(y.cols());
  if (n1 + n2 > kOracleSizeCap) {
    throw SizeCapError("lse_oracle_minmax: n1 + n2 = " + std::to_string(n1 + n2) + " exceeds " +
                       std::to_string(kOracleSizeCap));
  }
  const std::vector<LowerSetProfile> profiles = enumerate_lower_sets(n1, n2);

  // Column prefix sums: colsum[j][r] = sum of the first r entries of column j.
  std::vector<std::vector<double>> colsum(static_cast<std::size_t>(n2),
                                          std::vector<double>(static_cast<std::size_t>(n1) + 1, 0.0));
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      colsum[static_cast<std::size_t>(j)][static_cast<std::size_t>(i) + 1] =
          colsum[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] + y(i, j);
    }
  }

  GridMatrix result = GridMatrix::Constant(n1, n2, std::numeric_limits<double>::infinity());
  GridMatrix inner(n1, n2);
  // An upper set is the complement of a lower set with profile hU: cell (i,j)
  // belongs to it iff i >= hU[j]. The intersection with a lower set of
  // profile hL is the band hU[j] <= i < hL[j] per column.
  for (const LowerSetProfile& lower : profiles) {
    const std::vector<int>& hL = lower.heights;
    inner.setConstant(-std::numeric_limits<double>::infinity());
    for (const LowerSetProfile& upper_complement : profiles) {
      const std::vector<int>& hU = upper_complement.heights;
      double sum = 0.0;
      long cells = 0;
      for (int j = 0; j < n2; ++j) {
        const int lo = hU[static_cast<std::size_t>(j)];
        const int hi = hL[static_cast<std::size_t>(j)];
        if (lo < hi) {
          sum += colsum[static_cast<std::size_t>(j)][static_cast<std::size_t>(hi)] -
                 colsum[static_cast<std::size_t>(j)][static_cast<std::size_t>(lo)];
          cells += hi - lo;
        }
      }
      if (cells == 0) continue;
      const double mean = sum / static_cast<double>(cells);
      for (int j = 0; j < n2; ++j) {
        const int lo = hU[static_cast<std::size_t>(j)];
        const int hi = hL[static_cast<std::size_t>(j)];
        for (int i = lo; i < hi; ++i) inner(i, j) = std::max(inner(i, j), mean);
      }
    }
    for (int j = 0; j < n2; ++j) {
      for (int i = 0; i < hL[static_cast<std::size_t>(j)]; ++i) {
        result(i, j) = std::min(result(i, j), inner(i, j));
      }
    }
  }
  return result;
}

// Projection onto the product of per-rectangle isotonic cones. For any theta
// constant on the partition, the tangent cone of M at theta is contained in
// this product, so the squared norm of this projection upper-bounds the
// squared norm of the tangent-cone projection.
//
// The status variant reports convergence of the slowest block and always
// returns the assembled best iterates; the plain variant treats
// non-convergence as an error.
inline std::pair<GridMatrix, bool> project_block_cone_with_status(const GridMatrix& e,
                                                                  const RectangularPartition& p,
                                                                  double tol = kLseTol,
                                                                  long max_iter = kLseMaxIter) {
  require_valid_grid(e, "project_block_cone input");
  if (p.n1 != e.rows() || p.n2 != e.cols() || !validate_partition(p)) {
    throw std::invalid_argument("project_block_cone: partition invalid for this matrix");
  }
  GridMatrix out(e.rows(), e.cols());
  bool converged = true;
  for (const Rectangle& r : p.rects) {
    if (r.rows() == 1 && r.cols() == 1) {
      out(r.row_lo, r.col_lo) = e(r.row_lo, r.col_lo);
      continue;
    }
    GridMatrix block = e.block(r.row_lo, r.col_lo, r.rows(), r.cols());
    auto [fit, diag] = lse_fit(block, tol, max_iter);
    converged = converged && diag.converged;
    out.block(r.row_lo, r.col_lo, r.rows(), r.cols()) = fit;
  }
  return {std::move(out), converged};
}

inline GridMatrix project_block_cone(const GridMatrix& e, const RectangularPartition& p,
                                     double tol = kLseTol, long max_iter = kLseMaxIter) {
  auto [out, converged] = project_block_cone_with_status(e, p, tol, max_iter);
  if (!converged) {
    throw NonConvergenceError("project_block_cone: a block projection did not converge within " +
                              std::to_string(max_iter) + " cycles");
  }
  return out;
}

}  // namespace isomat
