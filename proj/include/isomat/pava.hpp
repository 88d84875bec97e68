#pragma once

#include <isomat/grid.hpp>

#include <limits>
#include <vector>

// Vector isotonic least squares.
//
// isotonic_fit_vector solves
//
//     minimize sum_i w_i (y_i - t_i)^2   over t_1 <= ... <= t_n
//
// by pool-adjacent-violators: the minimizer is a piecewise-constant pooling
// of the input, each pooled block carrying the weighted mean of its members.
// Blocks are merged only on a strict violation, so runs of equal values stay
// as separate blocks internally (the minimizer is the same either way).
//
// minmax_vector_oracle evaluates the closed form
//
//     t_i = min_{v >= i} max_{u <= i} mean(y_u .. y_v)
//
// by literal enumeration of all (u, v) windows. It is O(n^3) and exists to
// cross-check the solver, unit weights only.

namespace isomat {

struct WeightedSeries {
  Vector values;
  Vector weights;
};

inline void require_valid_series(const WeightedSeries& s) {
  if (s.values.size() == 0) throw std::invalid_argument("weighted series: empty input");
  if (s.values.size() != s.weights.size()) {
    throw std::invalid_argument("weighted series: values/weights length mismatch");
  }
  if (!s.values.allFinite() || !s.weights.allFinite() || (s.weights.array() <= 0.0).any()) {
    throw std::invalid_argument("weighted series: entries must be finite with positive weights");
  }
}

// Scratch buffers reused across many PAVA calls (one per solver instance).
struct PavaScratch {
  std::vector<double> mean;
  std::vector<double> weight;
  std::vector<Eigen::Index> len;
};

// In-place weighted PAVA over y[0..n); w == nullptr means unit weights.
inline void pava_inplace(double* y, const double* w, Eigen::Index n, PavaScratch& s) {
  s.mean.clear();
  s.weight.clear();
  s.len.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    double bm = y[i];
    double bw = w ? w[i] : 1.0;
    Eigen::Index bl = 1;
    while (!s.mean.empty() && s.mean.back() > bm) {
      const double pw = s.weight.back();
      bm = (s.mean.back() * pw + bm * bw) / (pw + bw);
      bw += pw;
      bl += s.len.back();
      s.mean.pop_back();
      s.weight.pop_back();
      s.len.pop_back();
    }
    s.mean.push_back(bm);
    s.weight.push_back(bw);
    s.len.push_back(bl);
  }
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < s.mean.size(); ++b) {
    for (Eigen::Index r = 0; r < s.len[b]; ++r) y[pos++] = s.mean[b];
  }
}

inline Vector isotonic_fit_vector(const WeightedSeries& series) {
  require_valid_series(series);
  Vector out = series.values;
  PavaScratch scratch;
  pava_inplace(out.data(), series.weights.data(), out.size(), scratch);
  return out;
}

inline Vector isotonic_fit_vector(const Vector& y) {
  if (y.size() == 0) throw std::invalid_argument("isotonic_fit_vector: empty input");
  Vector out = y;
  PavaScratch scratch;
  pava_inplace(out.data(), nullptr, out.size(), scratch);
  return out;
}

inline Vector minmax_vector_oracle(const Vector& y) {
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("minmax_vector_oracle: empty input");
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + y[i];
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double outer = std::numeric_limits<double>::infinity();
    for (Eigen::Index v = i; v < n; ++v) {
      double inner = -std::numeric_limits<double>::infinity();
      for (Eigen::Index u = 0; u <= i; ++u) {
        const double mean = (prefix[static_cast<std::size_t>(v) + 1] - prefix[static_cast<std::size_t>(u)]) /
                            static_cast<double>(v - u + 1);
        inner = std::max(inner, mean);
      }
      outer = std::min(outer, inner);
    }
    out[i] = outer;
  }
  return out;
}

}  // namespace isomat
