#pragma once

#include <isomat/csv.hpp>
#include <isomat/grid.hpp>

#include <cmath>
#include <string>

// Built-in test signals. Every kind produces an exactly isotonic matrix; a
// failed monotonicity check after generation is an internal bug, not user
// error.

namespace isomat {

enum class SignalKind { constant, ramp, block, dyadic, row_ramp, custom };

struct SignalSpec {
  SignalKind kind = SignalKind::constant;
  double value = 0.0;    // constant level
  double scale = 1.0;    // ramp / block / row_ramp amplitude; D(signal) = scale^2
  int k1 = 2, k2 = 2;    // block grid (block kind)
  std::string path;      // custom kind: matrix CSV
};

inline SignalSpec constant_signal(double value) {
  SignalSpec s;
  s.kind = SignalKind::constant;
  s.value = value;
  return s;
}

inline SignalSpec ramp_signal(double scale = 1.0) {
  SignalSpec s;
  s.kind = SignalKind::ramp;
  s.scale = scale;
  return s;
}

inline SignalSpec block_signal(int k1, int k2, double scale = 1.0) {
  SignalSpec s;
  s.kind = SignalKind::block;
  s.k1 = k1;
  s.k2 = k2;
  s.scale = scale;
  return s;
}

inline SignalSpec dyadic_signal() {
  SignalSpec s;
  s.kind = SignalKind::dyadic;
  return s;
}

inline SignalSpec row_ramp_signal(double scale = 1.0) {
  SignalSpec s;
  s.kind = SignalKind::row_ramp;
  s.scale = scale;
  return s;
}

inline SignalSpec custom_signal(std::string path) {
  SignalSpec s;
  s.kind = SignalKind::custom;
  s.path = std::move(path);
  return s;
}

inline std::string to_string(SignalKind k) {
  switch (k) {
    case SignalKind::constant: return "constant";
    case SignalKind::ramp: return "ramp";
    case SignalKind::block: return "block";
    case SignalKind::dyadic: return "dyadic";
    case SignalKind::row_ramp: return "row_ramp";
    case SignalKind::custom: return "custom";
  }
  throw std::invalid_argument("unknown SignalKind");
}

inline SignalKind signal_kind_from_string(const std::string& s) {
  if (s == "constant") return SignalKind::constant;
  if (s == "ramp") return SignalKind::ramp;
  if (s == "block") return SignalKind::block;
  if (s == "dyadic") return SignalKind::dyadic;
  if (s == "row_ramp") return SignalKind::row_ramp;
  if (s == "custom") return SignalKind::custom;
  throw std::invalid_argument("unknown signal kind '" + s + "'");
}

inline GridMatrix make_signal(const SignalSpec& spec, Eigen::Index n1, Eigen::Index n2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("make_signal: sizes must be >= 1");
  GridMatrix m(n1, n2);
  switch (spec.kind) {
    case SignalKind::constant:
      m.setConstant(spec.value);
      break;
    case SignalKind::ramp: {
      // theta_ij = s * ((i-1)/(n1-1) + (j-1)/(n2-1)) / 2; corners 0 and s, so
      // D(theta) = s^2 independently of the grid size.
      const double s = spec.scale;
      for (Eigen::Index i = 0; i < n1; ++i) {
        const double ri = n1 > 1 ? static_cast<double>(i) / static_cast<double>(n1 - 1) : 0.0;
        for (Eigen::Index j = 0; j < n2; ++j) {
          const double rj = n2 > 1 ? static_cast<double>(j) / static_cast<double>(n2 - 1) : 0.0;
          m(i, j) = s * (ri + rj) / 2.0;
        }
      }
      break;
    }
    case SignalKind::block: {
      if (spec.k1 < 1 || spec.k2 < 1 || spec.k1 > n1 || spec.k2 > n2) {
        throw std::invalid_argument("make_signal: block grid must satisfy 1 <= k1 <= n1, 1 <= k2 <= n2");
      }
      // k1 x k2 aligned constant blocks; block (u,v) sits at level
      // s * ((u-1)/(k1-1) + (v-1)/(k2-1)) / 2, the ramp evaluated on blocks.
      const double s = spec.scale;
      for (Eigen::Index i = 0; i < n1; ++i) {
        const int u = static_cast<int>(i * spec.k1 / n1);
        const double ru = spec.k1 > 1 ? static_cast<double>(u) / (spec.k1 - 1) : 0.0;
        for (Eigen::Index j = 0; j < n2; ++j) {
          const int v = static_cast<int>(j * spec.k2 / n2);
          const double rv = spec.k2 > 1 ? static_cast<double>(v) / (spec.k2 - 1) : 0.0;
          m(i, j) = s * (ru + rv) / 2.0;
        }
      }
      break;
    }
    case SignalKind::dyadic:
      // theta_ij = -(2^-i + 2^-j) with 1-based exponents; k(theta) = n.
      for (Eigen::Index i = 0; i < n1; ++i) {
        for (Eigen::Index j = 0; j < n2; ++j) {
          m(i, j) = -(std::ldexp(1.0, -static_cast<int>(i) - 1) + std::ldexp(1.0, -static_cast<int>(j) - 1));
        }
      }
      break;
    case SignalKind::row_ramp: {
      const double s = spec.scale;
      for (Eigen::Index i = 0; i < n1; ++i) {
        const double ri = n1 > 1 ? static_cast<double>(i) / static_cast<double>(n1 - 1) : 0.0;
        m.row(i).setConstant(s * ri);
      }
      break;
    }
    case SignalKind::custom: {
      GridMatrix loaded = read_matrix_csv(spec.path);
      if (loaded.rows() != n1 || loaded.cols() != n2) {
        throw std::invalid_argument("make_signal: custom matrix is " + std::to_string(loaded.rows()) + "x" +
                                    std::to_string(loaded.cols()) + ", requested " + std::to_string(n1) + "x" +
                                    std::to_string(n2));
      }
      m = loaded;
      break;
    }
  }
  if (spec.kind != SignalKind::custom && !is_isotonic(m, 0.0)) {
    throw std::logic_error("make_signal: generated signal is not isotonic (internal bug)");
  }
  if (spec.kind == SignalKind::custom && !is_isotonic(m, kIsoTol)) {
    throw std::invalid_argument("make_signal: custom matrix is not isotonic");
  }
  return m;
}

}  // namespace isomat
