#include "cli.hpp"

#include "formats.hpp"

#include <isomat/checks.hpp>
#include <isomat/csv.hpp>
#include <isomat/isomat.hpp>

#include <chrono>
#include <fstream>

namespace isomat::cli {

namespace {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

}  // namespace

int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
  GridMatrix y;
  try {
    y = read_matrix_csv(opt.input_csv);
  } catch (const std::exception& e) {
    err << "fit: " << e.what() << "\n";
    return kExitUsage;
  }
  GridMatrix fit;
  FitDiagnostics diag;
  try {
    std::tie(fit, diag) = lse_fit(y, opt.tol, opt.max_iter);
  } catch (const std::exception& e) {
    err << "fit: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    write_matrix_csv(opt.output_csv, fit);
  } catch (const std::exception& e) {
    err << "fit: " << e.what() << "\n";
    return kExitUsage;
  }
  out << diagnostics_to_json(diag).dump() << "\n";
  return diag.converged ? kExitOk : kExitNonConverged;
}

int cmd_oracle(const OracleOptions& opt, std::ostream& out, std::ostream& err) {
  GridMatrix y;
  try {
    y = read_matrix_csv(opt.input_csv);
  } catch (const std::exception& e) {
    err << "oracle: " << e.what() << "\n";
    return kExitUsage;
  }
  if (y.rows() + y.cols() > kOracleSizeCap) {
    err << "oracle: n1 + n2 = " << y.rows() + y.cols() << " exceeds the enumeration cap " << kOracleSizeCap
        << "\n";
    return kExitSizeCap;
  }
  const GridMatrix oracle = lse_oracle_minmax(y);
  auto [fit, diag] = lse_fit(y, opt.tol, opt.max_iter);
  Json j;
  j["oracle"] = matrix_to_json(oracle);
  j["max_abs_deviation"] = (oracle - fit).cwiseAbs().maxCoeff();
  j["solver"] = diagnostics_to_json(diag);
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& /*out*/, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = config_from_json(load_json_file(opt.config_json));
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<RiskEstimate> risks;
  std::vector<double> seconds;
  try {
    risks = simulate_risk(config, opt.threads, &seconds);
  } catch (const NonConvergenceError& e) {
    err << "simulate: " << e.what() << "\n";
    return kExitNonConverged;
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << "\n";
    return kExitUsage;
  }

  Json record;
  record["config"] = config_to_json(config);
  Json results = Json::array();
  for (std::size_t s = 0; s < risks.size(); ++s) {
    const auto [n1, n2] = config.sizes[s];
    const GridMatrix truth = make_signal(config.signal, n1, n2);
    Json row;
    row["n1"] = n1;
    row["n2"] = n2;
    row["n"] = static_cast<long long>(n1) * n2;
    row["mean_loss"] = risks[s].mean_loss;
    row["std_error"] = risks[s].std_error;
    row["replicates"] = risks[s].replicates;
    row["non_converged"] = risks[s].non_converged;
    row["k_greedy"] = k_greedy(truth, kIsoTol).k;
    results.push_back(std::move(row));
    err << "simulate: size " << n1 << "x" << n2 << " mean_loss=" << risks[s].mean_loss
        << " std_error=" << risks[s].std_error << " (" << seconds[s] << "s)\n";
  }
  record["results"] = std::move(results);
  if (opt.rate_fit) {
    if (config.sizes.size() < 2) {
      err << "simulate: --rate-fit needs at least 2 sizes\n";
      return kExitUsage;
    }
    std::vector<double> ns, rs;
    for (std::size_t s = 0; s < risks.size(); ++s) {
      ns.push_back(static_cast<double>(config.sizes[s].first) * config.sizes[s].second);
      rs.push_back(risks[s].mean_loss);
    }
    try {
      record["rate_fit"] = rate_fit_to_json(fit_rate(ns, rs));
    } catch (const std::exception& e) {
      err << "simulate: rate fit skipped: " << e.what() << "\n";
    }
  }
  record["version"] = kToolVersion;
  record["rng_transform"] = kRngTransformId;
  record["timing"] = Json{{"per_size_seconds", seconds}};

  try {
    atomic_write_text(opt.output_json, record.dump(2) + "\n");
    if (!opt.csv_path.empty()) {
      std::string flat;
      for (std::size_t s = 0; s < risks.size(); ++s) {
        const auto [n1, n2] = config.sizes[s];
        flat += std::to_string(n1) + "," + std::to_string(n2) + "," + std::to_string(static_cast<long long>(n1) * n2) +
                "," + to_string(config.estimator) + "," + format_double(risks[s].mean_loss) + "," +
                format_double(risks[s].std_error) + "\n";
      }
      atomic_write_text(opt.csv_path, flat);
    }
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_rates(const RatesOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<double> ns, rs;
  try {
    if (!opt.from_results.empty()) {
      const Json record = load_json_file(opt.from_results);
      if (!record.contains("results") || !record.at("results").is_array()) {
        throw ConfigError("'" + opt.from_results + "': missing results array");
      }
      for (const Json& row : record.at("results")) {
        ns.push_back(row.at("n").get<double>());
        rs.push_back(row.at("mean_loss").get<double>());
      }
    } else {
      const ExperimentConfig config = config_from_json(load_json_file(opt.config_json));
      if (config.sizes.size() < 2) {
        err << "rates: need at least 2 sizes\n";
        return kExitUsage;
      }
      const auto risks = simulate_risk(config, opt.threads);
      for (std::size_t s = 0; s < risks.size(); ++s) {
        ns.push_back(static_cast<double>(config.sizes[s].first) * config.sizes[s].second);
        rs.push_back(risks[s].mean_loss);
      }
    }
    if (ns.size() < 2) {
      err << "rates: need at least 2 sizes\n";
      return kExitUsage;
    }
    out << rate_fit_to_json(fit_rate(ns, rs)).dump() << "\n";
  } catch (const NonConvergenceError& e) {
    err << "rates: " << e.what() << "\n";
    return kExitNonConverged;
  } catch (const std::exception& e) {
    err << "rates: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_partition(const PartitionOptions& opt, std::ostream& out, std::ostream& err) {
  GridMatrix m;
  try {
    m = read_matrix_csv(opt.input_csv);
  } catch (const std::exception& e) {
    err << "partition: " << e.what() << "\n";
    return kExitUsage;
  }
  Json j;
  j["c"] = distinct_count_c(m, opt.tol);
  const PartitionResult greedy = k_greedy(m, opt.tol);
  RectangularPartition certificate = greedy.certificate;
  try {
    const PartitionResult exact = k_exact(m, opt.tol, opt.exact_cap);
    j["k_exact"] = exact.k;
    certificate = exact.certificate;
  } catch (const SizeCapError&) {
    j["k_exact"] = nullptr;
  }
  j["k_greedy"] = greedy.k;
  j["certificate"] = partition_to_json(certificate);
  j["D"] = range_D(m);
  j["V"] = variance_V(m);
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_lowerbound(const LowerboundOptions& opt, std::ostream& out, std::ostream& err) {
  AssouadFamily family{opt.D, opt.k, opt.n1, opt.n2, opt.sigma};
  try {
    require_valid_family(family);
  } catch (const std::exception& e) {
    err << "lowerbound: " << e.what() << "\n";
    return kExitUsage;
  }
  const MinimaxBound bound = minimax_bound(opt.D, opt.sigma, opt.n1, opt.n2);
  Json j;
  j["value"] = bound.value;
  j["conditions_ok"] = bound.conditions_ok;
  j["k_star"] = bound.k_star;
  j["family"] = Json{{"D", family.D},        {"k", family.k},
                     {"n1", family.n1},      {"n2", family.n2},
                     {"sigma", family.sigma}, {"m1", family.m1()},
                     {"m2", family.m2()},    {"d", family.d()},
                     {"floor_consistent", family.floor_consistent()},
                     {"has_leftover", family.has_leftover()}};
  if (opt.verify_pairs) {
    if (opt.k > 3) {
      err << "lowerbound: --verify-pairs is exhaustive over 2^(k^2) sign vectors and requires k <= 3\n";
      return kExitUsage;
    }
    const int d = family.d();
    const std::uint64_t total = std::uint64_t{1} << d;
    auto nth_tau = [&](std::uint64_t bits) {
      SignVector tau(static_cast<std::size_t>(d));
      for (int b = 0; b < d; ++b) tau[static_cast<std::size_t>(b)] = (bits >> b & 1) ? 1 : -1;
      return tau;
    };
    double max_rel = 0.0;
    bool all_ok = true;
    for (std::uint64_t a = 0; a < total; ++a) {
      for (std::uint64_t b = 0; b < total; ++b) {
        const LossIdentityReport r = check_loss_identity(family, nth_tau(a), nth_tau(b));
        max_rel = std::max(max_rel, std::abs(r.lhs - r.rhs) / (1.0 + r.rhs));
        all_ok = all_ok && r.ok;
      }
    }
    j["verify_pairs"] = Json{{"pairs", total * total}, {"max_rel_deviation", max_rel}, {"ok", all_ok}};
  }
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err) {
  const bool run_kkt = opt.suite == "kkt" || opt.suite == "all";
  const bool run_iso = opt.suite == "isoineq" || opt.suite == "all";
  const bool run_oracle = opt.suite == "oracle-ineq" || opt.suite == "all";
  if (!run_kkt && !run_iso && !run_oracle) {
    err << "check: unknown suite '" << opt.suite << "' (expected kkt, isoineq, oracle-ineq or all)\n";
    return kExitUsage;
  }
  Json checks = Json::array();
  bool all_ok = true;
  auto push = [&](Json c, bool ok) {
    c["ok"] = ok;
    all_ok = all_ok && ok;
    checks.push_back(std::move(c));
  };

  if (run_kkt) {
    const KktSuiteReport r = run_kkt_suite({{4, 4}, {8, 8}}, 100, opt.seed);
    push(Json{{"name", "kkt"},
              {"instances", r.instances},
              {"max_stationarity", r.max_stationarity},
              {"max_residual_sum", r.max_residual_sum},
              {"max_upper_set", r.max_upper_set},
              {"max_obtuseness", r.max_obtuseness},
              {"threshold", r.threshold}},
         r.ok);
  }
  if (run_iso) {
    for (const auto& [n1, n2] : {std::pair<int, int>{8, 8}, {16, 4}}) {
      NormalStream rng(opt.seed, static_cast<std::uint64_t>(n1), static_cast<std::uint64_t>(n2));
      const IsoineqReport r = check_isoineq(n1, n2, 1000, rng);
      push(Json{{"name", "isoineq"},
                {"n1", n1},
                {"n2", n2},
                {"samples", r.samples},
                {"max_ratio", r.max_ratio},
                {"violations", r.violations}},
           r.violations == 0);
    }
  }
  if (run_oracle) {
    const int n = 8;
    const GridMatrix zero = GridMatrix::Zero(n, n);
    const GridMatrix block = make_signal(block_signal(2, 2, 1.0), n, n);
    RectangularPartition quadrants;
    quadrants.n1 = quadrants.n2 = n;
    quadrants.rects = {Rectangle{0, 3, 0, 3}, Rectangle{0, 3, 4, 7}, Rectangle{4, 7, 0, 3}, Rectangle{4, 7, 4, 7}};
    struct Case {
      const char* name;
      const GridMatrix* star;
      const GridMatrix* theta;
      RectangularPartition part;
    };
    const std::vector<Case> cases = {{"zero_full", &zero, &zero, full_partition(n, n)},
                                     {"block_quadrants", &block, &block, quadrants},
                                     {"block_singletons", &block, &block, singleton_partition(n, n)}};
    for (const Case& c : cases) {
      const OracleIneqReport r =
          check_oracle_inequality(*c.star, *c.theta, c.part, 1.0, 500, opt.seed, 1e-8);
      push(Json{{"name", std::string("oracle_ineq_") + c.name},
                {"lhs_risk", r.lhs_risk},
                {"lhs_se", r.lhs_se},
                {"rhs_bound", r.rhs_bound},
                {"rhs_se", r.rhs_se}},
           r.ok);
    }
  }

  Json j;
  j["suite"] = opt.suite;
  j["seed"] = opt.seed;
  j["checks"] = std::move(checks);
  j["passed"] = all_ok;
  out << j.dump() << "\n";
  return all_ok ? kExitOk : kExitUsage;
}

}  // namespace isomat::cli
