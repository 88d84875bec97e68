#include "formats.hpp"

namespace isomat::cli {

namespace {

template <typename T>
T require_field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

template <typename T>
T optional_field(const Json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

}  // namespace

Json signal_to_json(const SignalSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case SignalKind::constant: j["value"] = s.value; break;
    case SignalKind::ramp:
    case SignalKind::row_ramp: j["scale"] = s.scale; break;
    case SignalKind::block:
      j["scale"] = s.scale;
      j["k1"] = s.k1;
      j["k2"] = s.k2;
      break;
    case SignalKind::dyadic: break;
    case SignalKind::custom: j["path"] = s.path; break;
  }
  return j;
}

SignalSpec signal_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": must be an object");
  SignalSpec s;
  const std::string kind = require_field<std::string>(j, "kind", path);
  try {
    s.kind = signal_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".kind: " + e.what());
  }
  switch (s.kind) {
    case SignalKind::constant: s.value = optional_field<double>(j, "value", path, 0.0); break;
    case SignalKind::ramp:
    case SignalKind::row_ramp: s.scale = optional_field<double>(j, "scale", path, 1.0); break;
    case SignalKind::block:
      s.scale = optional_field<double>(j, "scale", path, 1.0);
      s.k1 = require_field<int>(j, "k1", path);
      s.k2 = require_field<int>(j, "k2", path);
      if (s.k1 < 1 || s.k2 < 1) throw ConfigError(path + ".k1/k2: must be >= 1");
      break;
    case SignalKind::dyadic: break;
    case SignalKind::custom:
      s.path = require_field<std::string>(j, "path", path);
      if (s.path.empty()) throw ConfigError(path + ".path: must be nonempty");
      break;
  }
  return s;
}

Json partition_to_json(const RectangularPartition& p) {
  Json j;
  j["n1"] = p.n1;
  j["n2"] = p.n2;
  Json rects = Json::array();
  for (const Rectangle& r : p.rects) {
    rects.push_back(Json{{"row_lo", r.row_lo + 1},
                         {"row_hi", r.row_hi + 1},
                         {"col_lo", r.col_lo + 1},
                         {"col_hi", r.col_hi + 1}});
  }
  j["rects"] = std::move(rects);
  return j;
}

RectangularPartition partition_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": must be an object");
  RectangularPartition p;
  p.n1 = require_field<int>(j, "n1", path);
  p.n2 = require_field<int>(j, "n2", path);
  if (!j.contains("rects") || !j.at("rects").is_array()) {
    throw ConfigError(path + ".rects: missing rectangle array");
  }
  std::size_t idx = 0;
  for (const Json& rj : j.at("rects")) {
    const std::string rpath = path + ".rects[" + std::to_string(idx++) + "]";
    Rectangle r;
    r.row_lo = require_field<int>(rj, "row_lo", rpath) - 1;
    r.row_hi = require_field<int>(rj, "row_hi", rpath) - 1;
    r.col_lo = require_field<int>(rj, "col_lo", rpath) - 1;
    r.col_hi = require_field<int>(rj, "col_hi", rpath) - 1;
    if (r.row_lo < 0 || r.col_lo < 0 || r.row_lo > r.row_hi || r.col_lo > r.col_hi) {
      throw ConfigError(rpath + ": bounds must satisfy 1 <= lo <= hi");
    }
    p.rects.push_back(r);
  }
  return p;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["signal"] = signal_to_json(c.signal);
  Json sizes = Json::array();
  for (const auto& [n1, n2] : c.sizes) sizes.push_back(Json::array({n1, n2}));
  j["sizes"] = std::move(sizes);
  j["sigma"] = c.sigma;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["estimator"] = to_string(c.estimator);
  j["solver_tol"] = c.solver_tol;
  j["solver_max_iter"] = c.solver_max_iter;
  if (c.partition) j["partition"] = partition_to_json(*c.partition);
  return j;
}

ExperimentConfig config_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": must be an object");
  ExperimentConfig c;
  if (!j.contains("signal")) throw ConfigError(path + ".signal: missing required field");
  c.signal = signal_from_json(j.at("signal"), path + ".signal");
  if (!j.contains("sizes") || !j.at("sizes").is_array() || j.at("sizes").empty()) {
    throw ConfigError(path + ".sizes: must be a nonempty array of [n1, n2] pairs");
  }
  std::size_t idx = 0;
  for (const Json& sj : j.at("sizes")) {
    const std::string spath = path + ".sizes[" + std::to_string(idx++) + "]";
    if (!sj.is_array() || sj.size() != 2 || !sj[0].is_number_integer() || !sj[1].is_number_integer()) {
      throw ConfigError(spath + ": must be an [n1, n2] integer pair");
    }
    const int n1 = sj[0].get<int>();
    const int n2 = sj[1].get<int>();
    if (n1 < 1 || n2 < 1) throw ConfigError(spath + ": sizes must be >= 1");
    c.sizes.emplace_back(n1, n2);
  }
  c.sigma = require_field<double>(j, "sigma", path);
  c.replicates = require_field<int>(j, "replicates", path);
  c.seed = require_field<std::uint64_t>(j, "seed", path);
  const std::string est = require_field<std::string>(j, "estimator", path);
  try {
    c.estimator = estimator_from_string(est);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".estimator: " + e.what());
  }
  c.solver_tol = optional_field<double>(j, "solver_tol", path, kLseTol);
  c.solver_max_iter = optional_field<long>(j, "solver_max_iter", path, kLseMaxIter);
  if (j.contains("partition")) c.partition = partition_from_json(j.at("partition"), path + ".partition");
  try {
    validate_config(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Json rate_fit_to_json(const RateFit& f) {
  Json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["r_squared"] = f.r_squared;
  Json pts = Json::array();
  for (const auto& [x, y] : f.points) pts.push_back(Json::array({x, y}));
  j["points"] = std::move(pts);
  return j;
}

Json matrix_to_json(const GridMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json diagnostics_to_json(const FitDiagnostics& d) {
  Json j;
  j["iterations"] = d.iterations;
  j["final_change"] = d.final_change;
  j["kkt_residual"] = d.kkt_residual;
  j["converged"] = d.converged;
  return j;
}

bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b) {
  return operator_eq_signal(a.signal, b.signal) && a.sizes == b.sizes && a.sigma == b.sigma &&
         a.replicates == b.replicates && a.seed == b.seed && a.estimator == b.estimator &&
         a.solver_tol == b.solver_tol && a.solver_max_iter == b.solver_max_iter && a.partition == b.partition;
}

}  // namespace isomat::cli
