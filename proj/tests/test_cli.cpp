#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli.hpp"
#include "formats.hpp"

#include <isomat/csv.hpp>
#include <isomat/isomat.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace isomat;
using namespace isomat::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / ("isomat_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name));
    out << content;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

}  // namespace

TEST_CASE("matrix CSV round trip") {
  TempDir tmp;
  NormalStream rng(1, 0, 0);
  GridMatrix m(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = rng.next() * 1e3;
  m(0, 0) = 0.1;  // a value without an exact binary representation
  m(1, 2) = -7;

  write_matrix_csv(tmp.path("m.csv"), m);
  const GridMatrix back = read_matrix_csv(tmp.path("m.csv"));
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);

  write_matrix_csv(tmp.path("m2.csv"), back);
  CHECK(tmp.read("m.csv") == tmp.read("m2.csv"));

  tmp.write("ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(read_matrix_csv(tmp.path("ragged.csv")), CsvError);
  tmp.write("bad.csv", "1,zebra\n");
  CHECK_THROWS_AS(read_matrix_csv(tmp.path("bad.csv")), CsvError);
  tmp.write("empty.csv", "");
  CHECK_THROWS_AS(read_matrix_csv(tmp.path("empty.csv")), CsvError);
}

TEST_CASE("cmd_fit") {
  TempDir tmp;
  std::ostringstream out, err;

  SUBCASE("feasible input comes back unchanged with exit 0") {
    tmp.write("in.csv", "0,1\n1,2\n");
    FitOptions opt{tmp.path("in.csv"), tmp.path("out.csv")};
    CHECK(cmd_fit(opt, out, err) == kExitOk);
    CHECK(tmp.read("out.csv") == "0,1\n1,2\n");
    const Json diag = Json::parse(out.str());
    CHECK(diag.at("converged").get<bool>());
    CHECK(diag.at("iterations").get<long>() == 1);
  }

  SUBCASE("projection of the checkerboard") {
    tmp.write("in.csv", "1,0\n0,1\n");
    FitOptions opt{tmp.path("in.csv"), tmp.path("out.csv")};
    CHECK(cmd_fit(opt, out, err) == kExitOk);
    const GridMatrix fit = read_matrix_csv(tmp.path("out.csv"));
    GridMatrix y(2, 2);
    y << 1, 0, 0, 1;
    CHECK((fit - lse_oracle_minmax(y)).cwiseAbs().maxCoeff() <= 1e-8);
  }

  SUBCASE("malformed CSV exits 1 and writes nothing") {
    tmp.write("in.csv", "1,oops\n");
    FitOptions opt{tmp.path("in.csv"), tmp.path("out.csv")};
    CHECK(cmd_fit(opt, out, err) == kExitUsage);
    CHECK_FALSE(fs::exists(tmp.path("out.csv")));
  }

  SUBCASE("iteration starvation exits 2 but still writes") {
    tmp.write("in.csv", "1,0\n0,1\n");
    FitOptions opt{tmp.path("in.csv"), tmp.path("out.csv")};
    opt.tol = 1e-14;
    opt.max_iter = 1;
    CHECK(cmd_fit(opt, out, err) == kExitNonConverged);
    CHECK(fs::exists(tmp.path("out.csv")));
  }
}

TEST_CASE("cmd_oracle") {
  TempDir tmp;
  std::ostringstream out, err;

  SUBCASE("solver deviation is reported") {
    tmp.write("in.csv", "0.3,-1.2\n0.7,0.1\n");
    CHECK(cmd_oracle(OracleOptions{tmp.path("in.csv")}, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("max_abs_deviation").get<double>() <= 1e-6);
  }

  SUBCASE("feasible input has zero deviation") {
    tmp.write("in.csv", "0,1\n1,2\n");
    CHECK(cmd_oracle(OracleOptions{tmp.path("in.csv")}, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("max_abs_deviation").get<double>() <= 1e-12);
    const GridMatrix oracle = read_matrix_csv(tmp.path("in.csv"));
    for (int i = 0; i < 2; ++i)
      for (int jj = 0; jj < 2; ++jj)
        CHECK(j.at("oracle")[i][jj].get<double>() == doctest::Approx(oracle(i, jj)).epsilon(1e-12));
  }

  SUBCASE("size cap exits 3") {
    std::string big;
    for (int i = 0; i < 7; ++i) big += "1,1,1,1,1,1,1\n";
    tmp.write("in.csv", big);
    CHECK(cmd_oracle(OracleOptions{tmp.path("in.csv")}, out, err) == kExitSizeCap);
  }
}

TEST_CASE("partition JSON round trip uses 1-based bounds") {
  RectangularPartition p;
  p.n1 = 3;
  p.n2 = 3;
  p.rects = {Rectangle{0, 0, 0, 2}, Rectangle{1, 2, 0, 0}, Rectangle{1, 2, 1, 2}};
  const Json j = partition_to_json(p);
  CHECK(j.at("rects")[0].at("row_lo").get<int>() == 1);
  CHECK(j.at("rects")[0].at("col_hi").get<int>() == 3);
  const RectangularPartition back = partition_from_json(j, "p");
  CHECK(back == p);
  CHECK_THROWS_AS(partition_from_json(Json::parse(R"({"n1":2,"n2":2,"rects":[{"row_lo":0,"row_hi":1,"col_lo":1,"col_hi":2}]})"), "p"),
                  ConfigError);
}

TEST_CASE("config JSON round trip") {
  const std::string text = R"({
    "signal": {"kind": "block", "scale": 2.0, "k1": 2, "k2": 3},
    "sizes": [[6, 6], [12, 12]],
    "sigma": 0.5,
    "replicates": 7,
    "seed": 99,
    "estimator": "lse",
    "solver_tol": 1e-8
  })";
  const ExperimentConfig cfg = config_from_json(Json::parse(text));
  CHECK(cfg.signal.k2 == 3);
  CHECK(cfg.solver_tol == 1e-8);
  CHECK(cfg.solver_max_iter == kLseMaxIter);
  const ExperimentConfig again = config_from_json(config_to_json(cfg));
  CHECK(config_equal(cfg, again));

  CHECK_THROWS_WITH_AS(config_from_json(Json::parse(R"({"signal": {"kind": "ramp"}})")),
                       doctest::Contains("config.sizes"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(Json::parse(
                           R"({"signal": {"kind": "warp"}, "sizes": [[2,2]], "sigma": 1, "replicates": 1,
                               "seed": 0, "estimator": "lse"})")),
                       doctest::Contains("config.signal.kind"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(Json::parse(
                           R"({"signal": {"kind": "ramp"}, "sizes": [[2,0]], "sigma": 1, "replicates": 1,
                               "seed": 0, "estimator": "lse"})")),
                       doctest::Contains("config.sizes[0]"), ConfigError);
}

TEST_CASE("cmd_simulate") {
  TempDir tmp;

  SUBCASE("noiseless run and record contents") {
    tmp.write("cfg.json", R"({
      "signal": {"kind": "ramp", "scale": 1.0},
      "sizes": [[4, 4]],
      "sigma": 1e-12,
      "replicates": 1,
      "seed": 7,
      "estimator": "lse"
    })");
    std::ostringstream out, err;
    SimulateOptions opt;
    opt.config_json = tmp.path("cfg.json");
    opt.output_json = tmp.path("res.json");
    CHECK(cmd_simulate(opt, out, err) == kExitOk);
    const Json rec = Json::parse(tmp.read("res.json"));
    CHECK(rec.at("results")[0].at("mean_loss").get<double>() <= 1e-20);
    CHECK(rec.at("results")[0].at("n").get<long long>() == 16);
    CHECK(rec.at("results")[0].at("k_greedy").get<int>() == 16);
    CHECK(rec.at("rng_transform").get<std::string>() == kRngTransformId);
    // config echo re-parses to an equal config
    const ExperimentConfig echoed = config_from_json(rec.at("config"));
    const ExperimentConfig original = config_from_json(Json::parse(tmp.read("cfg.json")));
    CHECK(config_equal(echoed, original));
  }

  SUBCASE("numeric fields are identical across thread counts") {
    tmp.write("cfg.json", R"({
      "signal": {"kind": "ramp", "scale": 1.0},
      "sizes": [[4, 4], [6, 6]],
      "sigma": 0.5,
      "replicates": 40,
      "seed": 11,
      "estimator": "lse",
      "solver_tol": 1e-8
    })");
    auto run = [&](int threads, const std::string& outname) {
      std::ostringstream out, err;
      SimulateOptions opt;
      opt.config_json = tmp.path("cfg.json");
      opt.output_json = tmp.path(outname);
      opt.threads = threads;
      opt.rate_fit = true;
      REQUIRE(cmd_simulate(opt, out, err) == kExitOk);
      const Json rec = Json::parse(tmp.read(outname));
      return rec.at("config").dump() + rec.at("results").dump() + rec.at("rate_fit").dump();
    };
    CHECK(run(1, "a.json") == run(8, "b.json"));
  }

  SUBCASE("dyadic sweep records the greedy block counts") {
    tmp.write("cfg.json", R"({
      "signal": {"kind": "dyadic"},
      "sizes": [[2, 2], [4, 4]],
      "sigma": 0.5,
      "replicates": 2,
      "seed": 13,
      "estimator": "lse",
      "solver_tol": 1e-6
    })");
    std::ostringstream out, err;
    SimulateOptions opt;
    opt.config_json = tmp.path("cfg.json");
    opt.output_json = tmp.path("res.json");
    CHECK(cmd_simulate(opt, out, err) == kExitOk);
    const Json rec = Json::parse(tmp.read("res.json"));
    CHECK(rec.at("results")[0].at("k_greedy").get<int>() == 4);
    CHECK(rec.at("results")[1].at("k_greedy").get<int>() == 16);
  }

  SUBCASE("block_projection estimator with a partition from JSON") {
    tmp.write("cfg.json", R"({
      "signal": {"kind": "block", "scale": 1.0, "k1": 2, "k2": 2},
      "sizes": [[4, 4]],
      "sigma": 0.3,
      "replicates": 20,
      "seed": 17,
      "estimator": "block_projection",
      "solver_tol": 1e-8,
      "partition": {"n1": 4, "n2": 4, "rects": [
        {"row_lo": 1, "row_hi": 2, "col_lo": 1, "col_hi": 2},
        {"row_lo": 1, "row_hi": 2, "col_lo": 3, "col_hi": 4},
        {"row_lo": 3, "row_hi": 4, "col_lo": 1, "col_hi": 2},
        {"row_lo": 3, "row_hi": 4, "col_lo": 3, "col_hi": 4}]}
    })");
    std::ostringstream out, err;
    SimulateOptions opt;
    opt.config_json = tmp.path("cfg.json");
    opt.output_json = tmp.path("res.json");
    CHECK(cmd_simulate(opt, out, err) == kExitOk);
    const Json rec = Json::parse(tmp.read("res.json"));
    // blockwise projection of block-constant truth plus noise: risk is finite
    // and the echoed partition survives a round trip
    CHECK(rec.at("results")[0].at("mean_loss").get<double>() > 0.0);
    const ExperimentConfig echoed = config_from_json(rec.at("config"));
    REQUIRE(echoed.partition.has_value());
    CHECK(echoed.partition->rects.size() == 4);
    CHECK(echoed.partition->rects[0] == Rectangle{0, 1, 0, 1});
  }

  SUBCASE("solver starvation exits 2") {
    tmp.write("cfg.json", R"({
      "signal": {"kind": "constant", "value": 0.0},
      "sizes": [[6, 6]],
      "sigma": 1.0,
      "replicates": 4,
      "seed": 19,
      "estimator": "lse",
      "solver_tol": 1e-12,
      "solver_max_iter": 1
    })");
    std::ostringstream out, err;
    SimulateOptions opt;
    opt.config_json = tmp.path("cfg.json");
    opt.output_json = tmp.path("res.json");
    CHECK(cmd_simulate(opt, out, err) == kExitNonConverged);
  }

  SUBCASE("invalid config exits 1 with a path-precise message") {
    tmp.write("cfg.json", R"({
      "signal": {"kind": "ramp"},
      "sizes": [[4, 4]],
      "sigma": -1,
      "replicates": 1,
      "seed": 7,
      "estimator": "lse"
    })");
    std::ostringstream out, err;
    SimulateOptions opt;
    opt.config_json = tmp.path("cfg.json");
    opt.output_json = tmp.path("res.json");
    CHECK(cmd_simulate(opt, out, err) == kExitUsage);
    CHECK(err.str().find("config.sigma") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path("res.json")));
  }
}

TEST_CASE("cmd_rates") {
  TempDir tmp;

  SUBCASE("recovers a planted power law from a results record") {
    Json rec;
    rec["results"] = Json::array();
    for (double n : {64.0, 256.0, 1024.0}) {
      rec["results"].push_back(Json{{"n", n}, {"mean_loss", 5.0 * std::pow(n, -0.5)}});
    }
    tmp.write("res.json", rec.dump());
    std::ostringstream out, err;
    RatesOptions opt;
    opt.from_results = tmp.path("res.json");
    CHECK(cmd_rates(opt, out, err) == kExitOk);
    const Json fit = Json::parse(out.str());
    CHECK(fit.at("slope").get<double>() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fit.at("r_squared").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("fewer than two sizes exits 1") {
    Json rec;
    rec["results"] = Json::array({Json{{"n", 64.0}, {"mean_loss", 0.5}}});
    tmp.write("res.json", rec.dump());
    std::ostringstream out, err;
    RatesOptions opt;
    opt.from_results = tmp.path("res.json");
    CHECK(cmd_rates(opt, out, err) == kExitUsage);

    tmp.write("cfg.json", R"({
      "signal": {"kind": "ramp"}, "sizes": [[4, 4]], "sigma": 1, "replicates": 1,
      "seed": 0, "estimator": "lse"})");
    RatesOptions opt2;
    opt2.config_json = tmp.path("cfg.json");
    CHECK(cmd_rates(opt2, out, err) == kExitUsage);
  }

  SUBCASE("runs a small sweep end to end") {
    tmp.write("cfg.json", R"({
      "signal": {"kind": "ramp", "scale": 1.0},
      "sizes": [[4, 4], [8, 8], [16, 16]],
      "sigma": 1.0,
      "replicates": 30,
      "seed": 21,
      "estimator": "lse",
      "solver_tol": 1e-6
    })");
    std::ostringstream out, err;
    RatesOptions opt;
    opt.config_json = tmp.path("cfg.json");
    opt.threads = 2;
    CHECK(cmd_rates(opt, out, err) == kExitOk);
    const Json fit = Json::parse(out.str());
    CHECK(fit.at("slope").get<double>() < 0.0);
    CHECK(fit.at("points").size() == 3);
  }
}

TEST_CASE("cmd_partition") {
  TempDir tmp;
  std::ostringstream out, err;

  SUBCASE("indicator") {
    tmp.write("in.csv", "0,0,0\n0,1,1\n0,1,1\n");
    CHECK(cmd_partition(PartitionOptions{tmp.path("in.csv")}, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("c").get<int>() == 2);
    CHECK(j.at("k_exact").get<int>() == 3);
    CHECK(j.at("k_greedy").get<int>() >= 3);
    CHECK(j.at("certificate").at("rects").size() == 3);
    CHECK(j.at("D").get<double>() == 1.0);
  }

  SUBCASE("constant 5x5") {
    std::string rows;
    for (int i = 0; i < 5; ++i) rows += "2,2,2,2,2\n";
    tmp.write("in.csv", rows);
    CHECK(cmd_partition(PartitionOptions{tmp.path("in.csv")}, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("c").get<int>() == 1);
    CHECK(j.at("k_exact").get<int>() == 1);
    CHECK(j.at("V").get<double>() == 0.0);
  }

  SUBCASE("dyadic 4x4 is all singletons") {
    const GridMatrix dy = make_signal(dyadic_signal(), 4, 4);
    write_matrix_csv(tmp.path("in.csv"), dy);
    CHECK(cmd_partition(PartitionOptions{tmp.path("in.csv")}, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("k_exact").get<int>() == 16);
  }

  SUBCASE("past the exact cap k_exact is null") {
    const GridMatrix dy = make_signal(dyadic_signal(), 7, 7);
    write_matrix_csv(tmp.path("in.csv"), dy);
    CHECK(cmd_partition(PartitionOptions{tmp.path("in.csv")}, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("k_exact").is_null());
    CHECK(j.at("k_greedy").get<int>() == 49);
  }

  SUBCASE("parse errors exit 1") {
    tmp.write("in.csv", "1,?\n");
    CHECK(cmd_partition(PartitionOptions{tmp.path("in.csv")}, out, err) == kExitUsage);
  }
}

TEST_CASE("cmd_lowerbound") {
  std::ostringstream out, err;

  SUBCASE("bound formula") {
    LowerboundOptions opt{192.0, 1.0, 12, 16, 2, false};
    CHECK(cmd_lowerbound(opt, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("value").get<double>() == doctest::Approx(std::sqrt(1.0 / 192.0)).epsilon(1e-12));
    CHECK(j.at("family").at("m1").get<int>() == 6);
    CHECK(j.at("family").at("m2").get<int>() == 8);
  }

  SUBCASE("exhaustive pair verification") {
    LowerboundOptions opt{9.0, 1.0, 8, 8, 2, true};
    CHECK(cmd_lowerbound(opt, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("verify_pairs").at("ok").get<bool>());
    CHECK(j.at("verify_pairs").at("max_rel_deviation").get<double>() <= 1e-12);
    CHECK(j.at("verify_pairs").at("pairs").get<int>() == 256);
  }

  SUBCASE("invalid k exits 1") {
    LowerboundOptions opt{9.0, 1.0, 4, 4, 5, false};
    CHECK(cmd_lowerbound(opt, out, err) == kExitUsage);
    LowerboundOptions toobig{9.0, 1.0, 9, 9, 3, true};
    // k = 3 is allowed for verification; k = 4 is not
    CHECK(cmd_lowerbound(toobig, out, err) == kExitOk);
  }
}

TEST_CASE("cmd_check") {
  std::ostringstream out, err;

  SUBCASE("isoineq suite passes") {
    CheckOptions opt{"isoineq", 31};
    CHECK(cmd_check(opt, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("passed").get<bool>());
    for (const auto& c : j.at("checks")) CHECK(c.at("violations").get<long>() == 0);
  }

  SUBCASE("full suite passes") {
    CheckOptions opt{"all", 32};
    CHECK(cmd_check(opt, out, err) == kExitOk);
    const Json j = Json::parse(out.str());
    CHECK(j.at("passed").get<bool>());
    CHECK(j.at("checks").size() == 6);  // kkt, 2 isoineq grids, 3 oracle-ineq cases
  }

  SUBCASE("unknown suite exits 1") {
    CheckOptions opt{"entropy", 1};
    CHECK(cmd_check(opt, out, err) == kExitUsage);
  }
}
