#pragma once

#include <isomat/harness.hpp>
#include <isomat/partition.hpp>
#include <isomat/signals.hpp>

#include <json.hpp>

#include <string>
#include <vector>

// JSON wire formats for the CLI. Keys are snake_case; numbers are emitted by
// the JSON library's shortest round-trip formatter, so output is a pure
// function of the values. Rectangle bounds are 1-based in JSON (matching the
// written definition) and 0-based in memory.

namespace isomat::cli {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json signal_to_json(const SignalSpec& s);
SignalSpec signal_from_json(const Json& j, const std::string& path);

Json partition_to_json(const RectangularPartition& p);
RectangularPartition partition_from_json(const Json& j, const std::string& path);

Json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j, const std::string& path = "config");

Json rate_fit_to_json(const RateFit& f);

Json matrix_to_json(const GridMatrix& m);

Json diagnostics_to_json(const FitDiagnostics& d);

inline bool operator_eq_signal(const SignalSpec& a, const SignalSpec& b) {
  return a.kind == b.kind && a.value == b.value && a.scale == b.scale && a.k1 == b.k1 && a.k2 == b.k2 &&
         a.path == b.path;
}

bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace isomat::cli
