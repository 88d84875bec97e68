#pragma once

#include <isomat/grid.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

// Rectangular partitions of the index grid and the block-count functional
// k(m): the smallest number of axis-aligned rectangles covering the grid such
// that m is constant (max - min <= tol) on each rectangle.
//
// k_exact runs a branch-and-bound over partitions and is restricted to small
// grids (cell_cap, default 36). Branching is anchored: in any partition of
// the yet-uncovered region, the rectangle containing the first uncovered cell
// in row-major order necessarily has that cell as its top-left corner, so it
// suffices to branch over all constant rectangles anchored there. Pruning
// uses the chain-class count of uncovered values (two cells more than tol
// apart can never share a rectangle) plus a visited-state memo.
//
// k_greedy covers the grid by repeatedly taking the largest-area constant
// rectangle anchored at the first uncovered cell; it certifies an upper
// bound at any grid size.

namespace isomat {

// Inclusive 0-based bounds. (Serialized forms use 1-based bounds, matching
// the written definition of a rectangle.)
struct Rectangle {
  int row_lo = 0, row_hi = 0, col_lo = 0, col_hi = 0;

  int rows() const { return row_hi - row_lo + 1; }
  int cols() const { return col_hi - col_lo + 1; }
  long long area() const { return static_cast<long long>(rows()) * cols(); }
  bool contains(int i, int j) const {
    return i >= row_lo && i <= row_hi && j >= col_lo && j <= col_hi;
  }
  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

struct RectangularPartition {
  std::vector<Rectangle> rects;
  int n1 = 0, n2 = 0;

  friend bool operator==(const RectangularPartition&, const RectangularPartition&) = default;
};

inline RectangularPartition full_partition(int n1, int n2) {
  return {{Rectangle{0, n1 - 1, 0, n2 - 1}}, n1, n2};
}

inline RectangularPartition singleton_partition(int n1, int n2) {
  RectangularPartition p;
  p.n1 = n1;
  p.n2 = n2;
  p.rects.reserve(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) p.rects.push_back(Rectangle{i, i, j, j});
  }
  return p;
}

// Disjoint and covering, decided by a coverage-count raster.
inline bool validate_partition(const RectangularPartition& p) {
  if (p.n1 < 1 || p.n2 < 1) return false;
  std::vector<int> cover(static_cast<std::size_t>(p.n1) * static_cast<std::size_t>(p.n2), 0);
  for (const Rectangle& r : p.rects) {
    if (r.row_lo < 0 || r.col_lo < 0 || r.row_lo > r.row_hi || r.col_lo > r.col_hi ||
        r.row_hi >= p.n1 || r.col_hi >= p.n2) {
      return false;
    }
    for (int i = r.row_lo; i <= r.row_hi; ++i) {
      for (int j = r.col_lo; j <= r.col_hi; ++j) {
        ++cover[static_cast<std::size_t>(i) * static_cast<std::size_t>(p.n2) + static_cast<std::size_t>(j)];
      }
    }
  }
  for (int c : cover) {
    if (c != 1) return false;
  }
  return true;
}

inline bool is_constant_on(const GridMatrix& m, const RectangularPartition& p, double tol = 0.0) {
  require_valid_grid(m);
  if (p.n1 != m.rows() || p.n2 != m.cols() || !validate_partition(p)) {
    throw std::invalid_argument("is_constant_on: partition invalid for this matrix");
  }
  for (const Rectangle& r : p.rects) {
    const auto block = m.block(r.row_lo, r.col_lo, r.rows(), r.cols());
    if (block.maxCoeff() - block.minCoeff() > tol) return false;
  }
  return true;
}

struct PartitionResult {
  int k = 0;
  RectangularPartition certificate;
};

namespace detail {

// Number of chain classes (gaps > tol) among the values of uncovered cells;
// a valid lower bound on the rectangles still needed.
inline int chain_class_bound(const GridMatrix& m, std::uint64_t covered, double tol) {
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(m.size()));
  int idx = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j, ++idx) {
      if (!(covered >> idx & 1)) vals.push_back(m(i, j));
    }
  }
  if (vals.empty()) return 0;
  std::sort(vals.begin(), vals.end());
  int classes = 1;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    if (vals[i] - vals[i - 1] > tol) ++classes;
  }
  return classes;
}

// All rectangles anchored at (r, c) whose cells are uncovered and within tol
// of each other, as (height, width) extents.
inline void anchored_extents(const GridMatrix& m, std::uint64_t covered, double tol, int r, int c,
                             std::vector<std::pair<int, int>>& out) {
  const int n1 = static_cast<int>(m.rows());
  const int n2 = static_cast<int>(m.cols());
  out.clear();
  int maxw = n2 - c;
  std::vector<double> colmin(static_cast<std::size_t>(maxw), std::numeric_limits<double>::infinity());
  std::vector<double> colmax(static_cast<std::size_t>(maxw), -std::numeric_limits<double>::infinity());
  for (int h = 1; r + h - 1 < n1 && maxw >= 1; ++h) {
    const int rr = r + h - 1;
    for (int w = 1; w <= maxw; ++w) {
      const int cc = c + w - 1;
      if (covered >> (rr * n2 + cc) & 1) {
        maxw = w - 1;
        break;
      }
      colmin[static_cast<std::size_t>(w - 1)] = std::min(colmin[static_cast<std::size_t>(w - 1)], m(rr, cc));
      colmax[static_cast<std::size_t>(w - 1)] = std::max(colmax[static_cast<std::size_t>(w - 1)], m(rr, cc));
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int w = 1; w <= maxw; ++w) {
      lo = std::min(lo, colmin[static_cast<std::size_t>(w - 1)]);
      hi = std::max(hi, colmax[static_cast<std::size_t>(w - 1)]);
      if (hi - lo > tol) {
        maxw = w - 1;
        break;
      }
      out.emplace_back(h, w);
    }
  }
}

inline std::uint64_t rect_mask(int n2, int r, int c, int h, int w) {
  std::uint64_t mask = 0;
  for (int i = r; i < r + h; ++i) {
    for (int j = c; j < c + w; ++j) mask |= std::uint64_t{1} << (i * n2 + j);
  }
  return mask;
}

struct KExactSearch {
  const GridMatrix& m;
  double tol;
  int n1, n2;
  std::uint64_t full;
  int best = std::numeric_limits<int>::max();
  std::vector<Rectangle> best_rects, cur;
  std::unordered_map<std::uint64_t, int> seen;

  KExactSearch(const GridMatrix& mat, double t)
      : m(mat), tol(t), n1(static_cast<int>(mat.rows())), n2(static_cast<int>(mat.cols())) {
    const int cells = n1 * n2;
    full = cells == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << cells) - 1;
  }

  void dfs(std::uint64_t covered, int count) {
    if (covered == full) {
      if (count < best) {
        best = count;
        best_rects = cur;
      }
      return;
    }
    if (count + chain_class_bound(m, covered, tol) >= best) return;
    auto [it, inserted] = seen.try_emplace(covered, count);
    if (!inserted) {
      if (it->second <= count) return;
      it->second = count;
    }
    int idx = 0;
    int r = -1, c = -1;
    for (int i = 0; i < n1 && r < 0; ++i) {
      for (int j = 0; j < n2; ++j, ++idx) {
        if (!(covered >> idx & 1)) {
          r = i;
          c = j;
          break;
        }
      }
      if (r < 0) continue;
    }
    std::vector<std::pair<int, int>> extents;
    anchored_extents(m, covered, tol, r, c, extents);
    std::stable_sort(extents.begin(), extents.end(), [](const auto& a, const auto& b) {
      return a.first * a.second > b.first * b.second;
    });
    for (const auto& [h, w] : extents) {
      cur.push_back(Rectangle{r, r + h - 1, c, c + w - 1});
      dfs(covered | rect_mask(n2, r, c, h, w), count + 1);
      cur.pop_back();
    }
  }
};

}  // namespace detail

inline PartitionResult k_exact(const GridMatrix& m, double tol = 0.0, int cell_cap = 36) {
  require_valid_grid(m);
  if (m.size() > cell_cap) {
    throw SizeCapError("k_exact: " + std::to_string(m.size()) + " cells exceeds cap " +
                       std::to_string(cell_cap) + " (use k_greedy)");
  }
  if (m.size() > 64) throw SizeCapError("k_exact: more than 64 cells is unsupported");
  detail::KExactSearch search(m, tol);
  search.dfs(0, 0);
  PartitionResult res;
  res.k = search.best;
  res.certificate =
      RectangularPartition{search.best_rects, static_cast<int>(m.rows()), static_cast<int>(m.cols())};
  return res;
}

inline PartitionResult k_greedy(const GridMatrix& m, double tol = 0.0) {
  require_valid_grid(m);
  const int n1 = static_cast<int>(m.rows());
  const int n2 = static_cast<int>(m.cols());
  std::vector<char> covered(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2), 0);
  auto cov = [&](int i, int j) -> char& {
    return covered[static_cast<std::size_t>(i) * static_cast<std::size_t>(n2) + static_cast<std::size_t>(j)];
  };
  RectangularPartition part;
  part.n1 = n1;
  part.n2 = n2;
  std::vector<double> colmin, colmax;
  for (int r = 0; r < n1; ++r) {
    for (int c = 0; c < n2; ++c) {
      if (cov(r, c)) continue;
      // Largest-area constant rectangle of uncovered cells anchored at (r, c).
      int best_h = 1, best_w = 1;
      long long best_area = 1;
      int maxw = n2 - c;
      colmin.assign(static_cast<std::size_t>(maxw), std::numeric_limits<double>::infinity());
      colmax.assign(static_cast<std::size_t>(maxw), -std::numeric_limits<double>::infinity());
      for (int h = 1; r + h - 1 < n1 && maxw >= 1; ++h) {
        const int rr = r + h - 1;
        for (int w = 1; w <= maxw; ++w) {
          const int cc = c + w - 1;
          if (cov(rr, cc)) {
            maxw = w - 1;
            break;
          }
          colmin[static_cast<std::size_t>(w - 1)] = std::min(colmin[static_cast<std::size_t>(w - 1)], m(rr, cc));
          colmax[static_cast<std::size_t>(w - 1)] = std::max(colmax[static_cast<std::size_t>(w - 1)], m(rr, cc));
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int w = 1; w <= maxw; ++w) {
          lo = std::min(lo, colmin[static_cast<std::size_t>(w - 1)]);
          hi = std::max(hi, colmax[static_cast<std::size_t>(w - 1)]);
          if (hi - lo > tol) {
            maxw = w - 1;
            break;
          }
          const long long area = static_cast<long long>(h) * w;
          if (area > best_area) {
            best_area = area;
            best_h = h;
            best_w = w;
          }
        }
      }
      part.rects.push_back(Rectangle{r, r + best_h - 1, c, c + best_w - 1});
      for (int i = r; i < r + best_h; ++i) {
        for (int j = c; j < c + best_w; ++j) cov(i, j) = 1;
      }
    }
  }
  return PartitionResult{static_cast<int>(part.rects.size()), std::move(part)};
}

}  // namespace isomat
