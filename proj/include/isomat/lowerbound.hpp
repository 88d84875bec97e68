#pragma once

#include <isomat/grid.hpp>

#include <cmath>
#include <vector>

// Assouad hypercube family for the minimax lower bound. Fix a budget D, a
// block count k per axis and block sizes m_i = floor(n_i / k). For a sign
// vector tau in {-1,+1}^(k^2), the matrix g^tau takes the value
//
//     sqrt(D) * ((u + v - 2) / (2k) + tau_uv / (6k))
//
// on block (u, v) (1-based indices, block (u,v) covering rows
// (u-1)m1 < i <= u m1 and columns (v-1)m2 < j <= v m2) and sqrt(D) on any
// leftover cells beyond k*m_i. Every g^tau is isotonic, and the squared loss
// between two members is proportional to the Hamming distance of their sign
// vectors:
//
//     loss(g^t, g^t') = m1 * m2 * D * hamming(t, t') / (9 n k^2).

namespace isomat {

struct AssouadFamily {
  double D = 1.0;
  int k = 1;
  int n1 = 1, n2 = 1;
  double sigma = 1.0;

  int m1() const { return n1 / k; }
  int m2() const { return n2 / k; }
  int d() const { return k * k; }
  bool has_leftover() const { return k * m1() < n1 || k * m2() < n2; }
  // The construction defines m_i implicitly through k = floor(n_i / m_i);
  // the floor choice m_i = floor(n_i / k) does not always satisfy that, so
  // families where it fails are flagged rather than rejected.
  bool floor_consistent() const { return n1 / m1() == k && n2 / m2() == k; }
};

inline void require_valid_family(const AssouadFamily& f) {
  if (!(f.D > 0) || !(f.sigma > 0)) throw std::invalid_argument("assouad family: D and sigma must be positive");
  if (f.n1 < 1 || f.n2 < 1) throw std::invalid_argument("assouad family: sizes must be >= 1");
  if (f.k < 1 || f.k > std::min(f.n1, f.n2)) {
    throw std::invalid_argument("assouad family: k must satisfy 1 <= k <= min(n1, n2)");
  }
}

// Sign vector of length k^2, entries +-1, block (u, v) at index (u-1)*k + (v-1).
using SignVector = std::vector<int>;

inline GridMatrix assouad_matrix(const AssouadFamily& f, const SignVector& tau) {
  require_valid_family(f);
  if (static_cast<int>(tau.size()) != f.d()) {
    throw std::invalid_argument("assouad_matrix: tau must have length k^2");
  }
  for (int t : tau) {
    if (t != 1 && t != -1) throw std::invalid_argument("assouad_matrix: tau entries must be +-1");
  }
  const double root = std::sqrt(f.D);
  const int m1 = f.m1(), m2 = f.m2(), k = f.k;
  GridMatrix g(f.n1, f.n2);
  for (int i = 0; i < f.n1; ++i) {
    const int u = i / m1;  // 0-based block row; leftover when >= k
    for (int j = 0; j < f.n2; ++j) {
      const int v = j / m2;
      if (u >= k || v >= k) {
        g(i, j) = root;
      } else {
        const double t = static_cast<double>(tau[static_cast<std::size_t>(u * k + v)]);
        g(i, j) = root * (static_cast<double>(u + v) / (2.0 * k) + t / (6.0 * k));
      }
    }
  }
  return g;
}

inline int hamming(const SignVector& a, const SignVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

struct LossIdentityReport {
  double lhs = 0.0;  // measured squared loss between the two matrices
  double rhs = 0.0;  // m1 m2 D hamming / (9 n k^2)
  bool ok = false;
};

inline LossIdentityReport check_loss_identity(const AssouadFamily& f, const SignVector& tau,
                                              const SignVector& tau_prime) {
  const GridMatrix a = assouad_matrix(f, tau);
  const GridMatrix b = assouad_matrix(f, tau_prime);
  LossIdentityReport r;
  r.lhs = squared_loss(a, b);
  const double n = static_cast<double>(f.n1) * f.n2;
  r.rhs = static_cast<double>(f.m1()) * f.m2() * f.D * hamming(tau, tau_prime) / (9.0 * n * f.k * f.k);
  r.ok = std::abs(r.lhs - r.rhs) <= 1e-12 * (1.0 + r.rhs);
  return r;
}

struct MinimaxBound {
  double value = 0.0;      // sqrt(sigma^2 D / (192 n))
  bool conditions_ok = false;
  double k_star = 0.0;     // (n D / (9 sigma^2))^(1/4), the proof's block choice
};

inline MinimaxBound minimax_bound(double D, double sigma, int n1, int n2) {
  if (!(D > 0) || !(sigma > 0) || n1 < 1 || n2 < 1) {
    throw std::invalid_argument("minimax_bound: all parameters must be positive");
  }
  const double n = static_cast<double>(n1) * n2;
  const double s2 = sigma * sigma;
  MinimaxBound b;
  b.value = std::sqrt(s2 * D / (192.0 * n));
  const double c1 = std::pow(static_cast<double>(n1), 3) / n2;
  const double c2 = std::pow(static_cast<double>(n2), 3) / n1;
  b.conditions_ok = n >= 9.0 * s2 / D && std::min(c1, c2) >= D / (9.0 * s2);
  b.k_star = std::pow(n * D / (9.0 * s2), 0.25);
  return b;
}

}  // namespace isomat
