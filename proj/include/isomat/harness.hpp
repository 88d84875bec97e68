#pragma once

#include <isomat/grid.hpp>
#include <isomat/matrix_lse.hpp>
#include <isomat/partition.hpp>
#include <isomat/pava.hpp>
#include <isomat/rng.hpp>
#include <isomat/signals.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

// Monte Carlo risk estimation and the empirical property suites.
//
// simulate_risk draws y = theta* + sigma * eps with eps from the keyed
// stream (seed, size_index, replicate), runs the chosen estimator and
// averages the per-entry squared losses. Replicates are independent work
// items; they may be computed on any number of threads, but losses are
// stored by replicate index and reduced in fixed order, so the output is
// identical regardless of scheduling.

namespace isomat {

struct NoiseModel {
  double sigma = 1.0;  // i.i.d. mean-zero Gaussian per entry
};

enum class EstimatorKind { lse, oracle_row, block_projection };

inline std::string to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::lse: return "lse";
    case EstimatorKind::oracle_row: return "oracle_row";
    case EstimatorKind::block_projection: return "block_projection";
  }
  throw std::invalid_argument("unknown EstimatorKind");
}

inline EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "lse") return EstimatorKind::lse;
  if (s == "oracle_row") return EstimatorKind::oracle_row;
  if (s == "block_projection") return EstimatorKind::block_projection;
  throw std::invalid_argument("unknown estimator '" + s + "'");
}

struct ExperimentConfig {
  SignalSpec signal;
  std::vector<std::pair<int, int>> sizes;
  double sigma = 1.0;
  int replicates = 1;
  std::uint64_t seed = 0;
  EstimatorKind estimator = EstimatorKind::lse;
  double solver_tol = kLseTol;
  long solver_max_iter = kLseMaxIter;
  std::optional<RectangularPartition> partition;  // block_projection only
};

struct RiskEstimate {
  double mean_loss = 0.0;
  double std_error = 0.0;
  int replicates = 0;
  int non_converged = 0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log n, log risk)
};

inline void validate_config(const ExperimentConfig& c) {
  if (c.sizes.empty()) throw std::invalid_argument("config.sizes: must be nonempty");
  for (std::size_t i = 0; i < c.sizes.size(); ++i) {
    if (c.sizes[i].first < 1 || c.sizes[i].second < 1) {
      throw std::invalid_argument("config.sizes[" + std::to_string(i) + "]: entries must be >= 1");
    }
  }
  if (c.replicates < 1) throw std::invalid_argument("config.replicates: must be >= 1");
  if (!(c.sigma > 0)) throw std::invalid_argument("config.sigma: must be positive");
  if (!(c.solver_tol > 0)) throw std::invalid_argument("config.solver_tol: must be positive");
  if (c.solver_max_iter < 1) throw std::invalid_argument("config.solver_max_iter: must be >= 1");
  if (c.estimator == EstimatorKind::block_projection) {
    if (!c.partition) {
      throw std::invalid_argument("config.partition: required for the block_projection estimator");
    }
    for (std::size_t i = 0; i < c.sizes.size(); ++i) {
      if (c.partition->n1 != c.sizes[i].first || c.partition->n2 != c.sizes[i].second) {
        throw std::invalid_argument("config.partition: does not match config.sizes[" + std::to_string(i) + "]");
      }
    }
    if (!validate_partition(*c.partition)) {
      throw std::invalid_argument("config.partition: not a valid rectangular partition");
    }
  } else if (c.partition) {
    throw std::invalid_argument("config.partition: only meaningful for the block_projection estimator");
  }
}

namespace detail {

// Entries drawn in row-major order from the stream; fixed as part of the
// reproducibility contract.
inline GridMatrix draw_noise(Eigen::Index n1, Eigen::Index n2, NormalStream& g) {
  GridMatrix e(n1, n2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) e(i, j) = g.next();
  }
  return e;
}

inline void parallel_for(int total, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || total <= 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= total) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min(threads, total);
  pool.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline GridMatrix oracle_row_estimator(const GridMatrix& y) {
  require_valid_grid(y, "oracle_row_estimator input");
  Vector row_means = y.rowwise().mean();
  PavaScratch scratch;
  pava_inplace(row_means.data(), nullptr, row_means.size(), scratch);
  GridMatrix out(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) out.row(i).setConstant(row_means[i]);
  return out;
}

inline std::vector<RiskEstimate> simulate_risk(const ExperimentConfig& config, int threads = 1,
                                               std::vector<double>* per_size_seconds = nullptr) {
  validate_config(config);
  std::vector<RiskEstimate> out;
  out.reserve(config.sizes.size());
  if (per_size_seconds) per_size_seconds->clear();
  for (std::size_t s = 0; s < config.sizes.size(); ++s) {
    const auto t_start = std::chrono::steady_clock::now();
    const auto [n1, n2] = config.sizes[s];
    const GridMatrix truth = make_signal(config.signal, n1, n2);
    const int R = config.replicates;
    std::vector<double> losses(static_cast<std::size_t>(R), 0.0);
    std::vector<char> failed(static_cast<std::size_t>(R), 0);
    detail::parallel_for(R, threads, [&](int r) {
      NormalStream stream(config.seed, s, static_cast<std::uint64_t>(r));
      GridMatrix y = truth + config.sigma * detail::draw_noise(n1, n2, stream);
      GridMatrix est;
      switch (config.estimator) {
        case EstimatorKind::lse: {
          auto [fit, diag] = lse_fit(y, config.solver_tol, config.solver_max_iter);
          est = std::move(fit);
          failed[static_cast<std::size_t>(r)] = diag.converged ? 0 : 1;
          break;
        }
        case EstimatorKind::oracle_row:
          est = oracle_row_estimator(y);
          break;
        case EstimatorKind::block_projection: {
          auto [fit, converged] =
              project_block_cone_with_status(y, *config.partition, config.solver_tol, config.solver_max_iter);
          est = std::move(fit);
          failed[static_cast<std::size_t>(r)] = converged ? 0 : 1;
          break;
        }
      }
      losses[static_cast<std::size_t>(r)] = squared_loss(truth, est);
    });

    RiskEstimate est;
    est.replicates = R;
    for (char f : failed) est.non_converged += f;
    if (est.non_converged > 0.01 * R) {
      throw NonConvergenceError("simulate_risk: size " + std::to_string(n1) + "x" + std::to_string(n2) + ": " +
                                std::to_string(est.non_converged) + "/" + std::to_string(R) +
                                " replicates failed to converge (budget 1%)");
    }
    double sum = 0.0;
    for (double l : losses) sum += l;
    est.mean_loss = sum / R;
    if (R > 1) {
      double ss = 0.0;
      for (double l : losses) ss += (l - est.mean_loss) * (l - est.mean_loss);
      est.std_error = std::sqrt(ss / (R - 1)) / std::sqrt(static_cast<double>(R));
    }
    out.push_back(est);
    if (per_size_seconds) {
      per_size_seconds->push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count());
    }
  }
  return out;
}

inline RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& risks) {
  if (ns.size() != risks.size() || ns.size() < 2) {
    throw std::invalid_argument("fit_rate: need >= 2 (n, risk) pairs of equal length");
  }
  RateFit fit;
  fit.points.reserve(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(risks[i] > 0) || !(ns[i] > 0)) throw std::invalid_argument("fit_rate: ns and risks must be positive");
    fit.points.emplace_back(std::log(ns[i]), std::log(risks[i]));
  }
  const double m = static_cast<double>(fit.points.size());
  double mx = 0, my = 0;
  for (const auto& [x, yv] : fit.points) {
    mx += x;
    my += yv;
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, yv] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (yv - my);
    syy += (yv - my) * (yv - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_rate: all n values identical");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0;
    for (const auto& [x, yv] : fit.points) {
      const double pred = fit.intercept + fit.slope * x;
      ss_res += (yv - pred) * (yv - pred);
    }
    fit.r_squared = 1.0 - ss_res / syy;
  }
  return fit;
}

// Random element of the unit ball of M: a mixture of additive f(i)+g(j)
// surfaces, aligned block staircases and entrywise minima of two such,
// shifted by a random constant and scaled to Frobenius norm 1.
inline GridMatrix sample_unit_ball_isotonic(Eigen::Index n1, Eigen::Index n2, NormalStream& rng) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("sample_unit_ball_isotonic: sizes must be >= 1");
  auto additive = [&]() {
    Vector f(n1), g(n2);
    double acc = rng.next();
    for (Eigen::Index i = 0; i < n1; ++i) {
      f[i] = acc;
      acc += std::abs(rng.next());
    }
    acc = rng.next();
    for (Eigen::Index j = 0; j < n2; ++j) {
      g[j] = acc;
      acc += std::abs(rng.next());
    }
    GridMatrix m(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i) {
      for (Eigen::Index j = 0; j < n2; ++j) m(i, j) = f[i] + g[j];
    }
    return m;
  };
  auto staircase = [&]() {
    const int k1 = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n1));
    const int k2 = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n2));
    Vector lf(k1), lg(k2);
    double acc = rng.next();
    for (int u = 0; u < k1; ++u) {
      lf[u] = acc;
      acc += std::abs(rng.next());
    }
    acc = rng.next();
    for (int v = 0; v < k2; ++v) {
      lg[v] = acc;
      acc += std::abs(rng.next());
    }
    GridMatrix m(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i) {
      const int u = static_cast<int>(i * k1 / n1);
      for (Eigen::Index j = 0; j < n2; ++j) {
        const int v = static_cast<int>(j * k2 / n2);
        m(i, j) = lf[u] + lg[v];
      }
    }
    return m;
  };
  for (int attempt = 0; attempt < 64; ++attempt) {
    GridMatrix m;
    switch (rng.next_u64() % 3) {
      case 0: m = additive(); break;
      case 1: m = staircase(); break;
      default: m = additive().cwiseMin(staircase()); break;
    }
    m.array() += rng.next();  // random recentering, monotonicity unaffected
    const double norm = m.norm();
    if (norm < 1e-12) continue;
    m /= norm;
    return m;
  }
  throw std::runtime_error("sample_unit_ball_isotonic: repeated degenerate samples");
}

struct IsoineqReport {
  double max_ratio = 0.0;
  long violations = 0;
  int samples = 0;
};

// Empirical check of the pointwise envelope on the unit ball of M:
// |theta_ij| <= max(1/sqrt(i j), 1/sqrt((n1-i+1)(n2-j+1))) with 1-based i, j.
inline IsoineqReport check_isoineq(Eigen::Index n1, Eigen::Index n2, int samples, NormalStream& rng) {
  if (samples < 1) throw std::invalid_argument("check_isoineq: samples must be >= 1");
  IsoineqReport report;
  report.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const GridMatrix theta = sample_unit_ball_isotonic(n1, n2, rng);
    for (Eigen::Index i = 0; i < n1; ++i) {
      for (Eigen::Index j = 0; j < n2; ++j) {
        const double lower = std::sqrt(1.0 / (static_cast<double>(i + 1) * static_cast<double>(j + 1)));
        const double upper = std::sqrt(1.0 / (static_cast<double>(n1 - i) * static_cast<double>(n2 - j)));
        const double bound = std::max(lower, upper);
        const double ratio = std::abs(theta(i, j)) / bound;
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (ratio > 1.0 + 1e-9) ++report.violations;
      }
    }
  }
  return report;
}

struct OracleIneqReport {
  double lhs_risk = 0.0, lhs_se = 0.0;
  double rhs_bound = 0.0, rhs_se = 0.0;
  bool ok = false;
};

// Monte Carlo check of the tangent-cone risk inequality
//
//     E loss(theta*, lse(theta* + eps))
//       <= (1/n) (|theta* - theta|^2 + E |Pi(eps, T_M(theta))|^2)
//
// with the tangent-cone projection replaced by the per-rectangle block-cone
// projection, a superset, so the right side only grows. Both sides share the
// same noise draws; the inequality holds path by path, so this is a tight
// paired comparison.
inline OracleIneqReport check_oracle_inequality(const GridMatrix& theta_star, const GridMatrix& theta,
                                                const RectangularPartition& p, double sigma, int replicates,
                                                std::uint64_t seed, double solver_tol = kLseTol,
                                                long solver_max_iter = kLseMaxIter) {
  require_valid_grid(theta_star, "check_oracle_inequality theta_star");
  require_valid_grid(theta, "check_oracle_inequality theta");
  if (theta_star.rows() != theta.rows() || theta_star.cols() != theta.cols()) {
    throw std::invalid_argument("check_oracle_inequality: dimension mismatch");
  }
  if (!is_isotonic(theta, kIsoTol)) throw std::invalid_argument("check_oracle_inequality: theta must be isotonic");
  if (!is_constant_on(theta, p, kIsoTol)) {
    throw std::invalid_argument("check_oracle_inequality: theta must be constant on the partition");
  }
  if (!(sigma > 0) || replicates < 1) {
    throw std::invalid_argument("check_oracle_inequality: sigma must be positive, replicates >= 1");
  }
  const double n = static_cast<double>(theta_star.size());
  const double approx = (theta_star - theta).squaredNorm();
  std::vector<double> lhs(static_cast<std::size_t>(replicates)), rhs(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    NormalStream stream(seed, 0, static_cast<std::uint64_t>(r));
    const GridMatrix eps = sigma * detail::draw_noise(theta_star.rows(), theta_star.cols(), stream);
    auto [fit, diag] = lse_fit(theta_star + eps, solver_tol, solver_max_iter);
    lhs[static_cast<std::size_t>(r)] = squared_loss(theta_star, fit);
    const GridMatrix proj = project_block_cone(eps, p, solver_tol, solver_max_iter);
    rhs[static_cast<std::size_t>(r)] = (approx + proj.squaredNorm()) / n;
  }
  auto mean_se = [&](const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = v.size() > 1 ? std::sqrt(ss / (static_cast<double>(v.size()) - 1)) /
                                         std::sqrt(static_cast<double>(v.size()))
                                   : 0.0;
    return std::pair<double, double>(mean, se);
  };
  OracleIneqReport report;
  std::tie(report.lhs_risk, report.lhs_se) = mean_se(lhs);
  std::tie(report.rhs_bound, report.rhs_se) = mean_se(rhs);
  report.ok = report.lhs_risk <=
              report.rhs_bound + 3.0 * std::sqrt(report.lhs_se * report.lhs_se + report.rhs_se * report.rhs_se);
  return report;
}

}  // namespace isomat
