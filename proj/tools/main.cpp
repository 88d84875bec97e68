#include "../src/cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>

int main(int argc, char** argv) {
  using namespace isomat::cli;
  CLI::App app{"Bivariate isotonic least squares: fitting, complexity functionals, "
               "minimax lower-bound construction and a Monte Carlo risk harness"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  FitOptions fit;
  auto* cfit = app.add_subcommand("fit", "Project a matrix CSV onto the isotonic cone");
  cfit->add_option("input", fit.input_csv, "input matrix CSV")->required();
  cfit->add_option("output", fit.output_csv, "output matrix CSV")->required();
  cfit->add_option("--tol", fit.tol, "Dykstra stopping tolerance");
  cfit->add_option("--max-iter", fit.max_iter, "maximum Dykstra cycles");

  OracleOptions oracle;
  auto* corc = app.add_subcommand("oracle", "Exact small-grid fit by lower/upper-set enumeration");
  corc->add_option("input", oracle.input_csv, "input matrix CSV (n1 + n2 <= 12)")->required();
  corc->add_option("--tol", oracle.tol, "solver tolerance for the deviation report");
  corc->add_option("--max-iter", oracle.max_iter, "maximum Dykstra cycles");

  SimulateOptions sim;
  auto* csim = app.add_subcommand("simulate", "Monte Carlo risk estimation from a config JSON");
  csim->add_option("config", sim.config_json, "experiment config JSON")->required();
  csim->add_option("output", sim.output_json, "results record JSON")->required();
  csim->add_option("--csv", sim.csv_path, "also write flat CSV rows (n1,n2,n,estimator,mean_loss,std_error)");
  csim->add_option("--threads", sim.threads, "worker threads (results are thread-count independent)");
  csim->add_flag("--rate-fit", sim.rate_fit, "include a log-log rate fit in the record");

  RatesOptions rates;
  auto* crat = app.add_subcommand("rates", "Fit a log-log rate to a sweep");
  crat->add_option("config", rates.config_json, "experiment config JSON (>= 2 sizes)");
  crat->add_option("--from-results", rates.from_results, "fit a previously written results record instead");
  crat->add_option("--threads", rates.threads, "worker threads");

  PartitionOptions part;
  auto* cpart = app.add_subcommand("partition", "Complexity functionals c, k and a certificate partition");
  cpart->add_option("input", part.input_csv, "input matrix CSV")->required();
  cpart->add_option("--tol", part.tol, "constancy tolerance");
  cpart->add_option("--exact-cap", part.exact_cap, "max cells for the exact search");

  LowerboundOptions lb;
  auto* clb = app.add_subcommand("lowerbound", "Minimax lower bound and the Assouad family");
  clb->add_option("--D", lb.D, "squared-range budget")->required();
  clb->add_option("--sigma", lb.sigma, "noise standard deviation")->required();
  clb->add_option("--n1", lb.n1, "rows")->required();
  clb->add_option("--n2", lb.n2, "columns")->required();
  clb->add_option("--k", lb.k, "blocks per axis")->required();
  clb->add_flag("--verify-pairs", lb.verify_pairs, "exhaustively verify the loss identity (k <= 3)");

  CheckOptions check;
  auto* cchk = app.add_subcommand("check", "Batch property suites");
  cchk->add_option("--suite", check.suite, "kkt | isoineq | oracle-ineq | all");
  cchk->add_option("--seed", check.seed, "RNG seed (required; runs are reproducible)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version land here with success; real parse errors map to
    // the documented usage exit code.
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (cfit->parsed()) return cmd_fit(fit);
  if (corc->parsed()) return cmd_oracle(oracle);
  if (csim->parsed()) return cmd_simulate(sim);
  if (crat->parsed()) {
    if (rates.config_json.empty() && rates.from_results.empty()) {
      std::cerr << "rates: provide a config JSON or --from-results\n";
      return kExitUsage;
    }
    return cmd_rates(rates);
  }
  if (cpart->parsed()) return cmd_partition(part);
  if (clb->parsed()) return cmd_lowerbound(lb);
  if (cchk->parsed()) return cmd_check(check);
  return kExitUsage;
}
