#pragma once

#include <cstdint>
#include <iostream>
#include <string>

// CLI entry points, separated from argument parsing so tests can drive them
// in-process. Exit codes: 0 success, 1 usage/parse error, 2 solver
// non-convergence, 3 size cap exceeded.

namespace isomat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNonConverged = 2;
inline constexpr int kExitSizeCap = 3;

inline constexpr const char* kToolVersion = "isomat " ISOMAT_VERSION;

struct FitOptions {
  std::string input_csv;
  std::string output_csv;
  double tol = 1e-10;
  long max_iter = 100000;
};
int cmd_fit(const FitOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr);

struct OracleOptions {
  std::string input_csv;
  double tol = 1e-10;
  long max_iter = 100000;
};
int cmd_oracle(const OracleOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr);

struct SimulateOptions {
  std::string config_json;
  std::string output_json;
  std::string csv_path;  // empty: no flat CSV
  int threads = 1;
  bool rate_fit = false;
};
int cmd_simulate(const SimulateOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr);

struct RatesOptions {
  std::string config_json;   // run a sweep, or
  std::string from_results;  // fit a previously written results record
  int threads = 1;
};
int cmd_rates(const RatesOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr);

struct PartitionOptions {
  std::string input_csv;
  double tol = 0.0;
  int exact_cap = 36;
};
int cmd_partition(const PartitionOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr);

struct LowerboundOptions {
  double D = 1.0;
  double sigma = 1.0;
  int n1 = 1, n2 = 1;
  int k = 1;
  bool verify_pairs = false;
};
int cmd_lowerbound(const LowerboundOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr);

struct CheckOptions {
  std::string suite = "all";  // kkt | isoineq | oracle-ineq | all
  std::uint64_t seed = 0;
};
int cmd_check(const CheckOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace isomat::cli
