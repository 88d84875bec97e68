#pragma once

#include <isomat/harness.hpp>
#include <isomat/matrix_lse.hpp>
#include <isomat/rng.hpp>

#include <utility>
#include <vector>

// KKT / polar-cone property suite for the matrix LSE. The projection of y
// onto M is characterized by
//
//     <y - fit, fit> = 0          (stationarity)
//     <y - fit, m>  <= 0  for all m in M  (residual in the polar cone)
//
// and M is generated by upper-set indicators together with +-constants, so
// the polar condition is probed on the constant direction (residual sum),
// sampled upper-set indicators, and the obtuseness form <y - fit, t - fit>
// with random isotonic t. All quantities are reported as scale-free ratios
// against a 1e-8 threshold.

namespace isomat {

// Random upper set as an indicator matrix: the complement of a lower set
// whose staircase profile is sampled uniformly from sorted uniform heights.
inline GridMatrix random_upper_set_indicator(Eigen::Index n1, Eigen::Index n2, NormalStream& rng) {
  std::vector<int> h(static_cast<std::size_t>(n2));
  for (auto& v : h) v = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n1 + 1));
  std::sort(h.begin(), h.end(), std::greater<int>());
  GridMatrix u = GridMatrix::Zero(n1, n2);
  for (Eigen::Index j = 0; j < n2; ++j) {
    for (Eigen::Index i = h[static_cast<std::size_t>(j)]; i < n1; ++i) u(i, j) = 1.0;
  }
  return u;
}

struct KktSuiteReport {
  int instances = 0;
  double max_stationarity = 0.0;   // |<y-fit, fit>| / (1 + |y| |fit|)
  double max_residual_sum = 0.0;   // |sum(y-fit)| / (1 + |y|)
  double max_upper_set = 0.0;      // max <y-fit, 1_U> / (1 + |y|), signed
  double max_obtuseness = 0.0;     // max <y-fit, t-fit> / (1 + |y-fit||t-fit|), signed
  double threshold = 1e-8;
  bool ok = false;
};

inline KktSuiteReport run_kkt_suite(const std::vector<std::pair<Eigen::Index, Eigen::Index>>& sizes,
                                    int instances_per_size, std::uint64_t seed, double solver_tol = kLseTol,
                                    long solver_max_iter = 200000, int sampled_directions = 100) {
  KktSuiteReport rep;
  rep.max_upper_set = -std::numeric_limits<double>::infinity();
  rep.max_obtuseness = -std::numeric_limits<double>::infinity();
  std::uint64_t instance_key = 0;
  for (const auto& [n1, n2] : sizes) {
    for (int inst = 0; inst < instances_per_size; ++inst, ++instance_key) {
      NormalStream rng(seed, 0, instance_key);
      const GridMatrix y = detail::draw_noise(n1, n2, rng);
      auto [fit, diag] = lse_fit(y, solver_tol, solver_max_iter);
      const GridMatrix res = y - fit;
      ++rep.instances;

      rep.max_stationarity =
          std::max(rep.max_stationarity, std::abs((res.array() * fit.array()).sum()) / (1.0 + y.norm() * fit.norm()));
      rep.max_residual_sum = std::max(rep.max_residual_sum, std::abs(res.sum()) / (1.0 + y.norm()));
      for (int s = 0; s < sampled_directions; ++s) {
        const GridMatrix u = random_upper_set_indicator(n1, n2, rng);
        rep.max_upper_set = std::max(rep.max_upper_set, (res.array() * u.array()).sum() / (1.0 + y.norm()));
        GridMatrix t = sample_unit_ball_isotonic(n1, n2, rng) * (1.0 + y.norm());
        const GridMatrix diff = t - fit;
        rep.max_obtuseness = std::max(rep.max_obtuseness,
                                      (res.array() * diff.array()).sum() / (1.0 + res.norm() * diff.norm()));
      }
    }
  }
  rep.ok = rep.max_stationarity <= rep.threshold && rep.max_residual_sum <= rep.threshold &&
           rep.max_upper_set <= rep.threshold && rep.max_obtuseness <= rep.threshold;
  return rep;
}

}  // namespace isomat
