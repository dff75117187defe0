#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "corrnum/manhattan.hpp"
#include "corrnum/representation.hpp"

namespace corrnum {

inline constexpr const char* kVersion = "corrnum 0.1.0";

struct ColumnSpec {
  std::string representation;
  std::string functional;  // empty: alpha1 in dimension 2, hilbert otherwise
};

struct RunConfig {
  int rank = 2;
  int n_max = 10;
  bool include_powers = true;
  std::vector<nlohmann::json> representations;  // documents as given
  std::vector<ColumnSpec> columns;              // empty: one default column per representation
  std::pair<std::string, std::string> pair;     // column names; empty: first two columns

  // b grid in units of h2, or explicit values
  int b_points = 33;
  double b_lo = -0.1;
  double b_hi = 1.1;
  std::vector<double> b_values;

  double epsilon = 0.2;
  int x_points = 12;
  double x_lo = 0.35;
  double x_hi = 0.8;
  std::vector<double> x_values;
  bool equal_windows = false;
  double raw_epsilon = 0.2;

  double window_lo = 0.5;
  double window_hi = 0.95;
  std::size_t window_min_items = 200;

  std::filesystem::path out = "out";
  int threads = 1;
  std::uint64_t seed = 0;
  bool force = false;
  bool allow_proportional = false;
  int pilot_length = 6;
  int spot_checks = 200;

  std::vector<double> demo_epsilons{1.0, 0.5, 0.25};
  double demo_K = 3.0;
  double demo_angle = 1.5707963267948966;

  // Every key except out and threads, which cannot change results.
  nlohmann::json canonical() const;
};

// JSON schema of the config document (published with the tool).
const nlohmann::json& config_schema();

// Validates against the schema: unknown keys and wrong types are ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

std::vector<Representation> build_representations(const RunConfig& config);
std::vector<SpectrumRequest> build_requests(const RunConfig& config);
SpectrumOptions spectrum_options(const RunConfig& config);
WindowPolicy window_policy(const RunConfig& config);
CorrelationOptions correlation_options(const RunConfig& config);

}  // namespace corrnum
