#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrnum/spectrum.hpp"

namespace corrnum {

// Fractions of the completeness bound T_max; explicit t_lo/t_hi override.
struct WindowPolicy {
  double lo_fraction = 0.5;
  double hi_fraction = 0.95;
  std::optional<double> t_lo;
  std::optional<double> t_hi;
  std::size_t min_items = 200;
  int jackknife_blocks = 8;
};

enum class GrowthMethod { Regression, Bisection, Both };
std::string to_string(GrowthMethod m);

struct GrowthEstimate {
  double value = 0;
  double stderr_ = 0;
  double t_lo = 0;
  double t_hi = 0;
  std::size_t sample_count = 0;  // items with value in [t_lo, t_hi]
  GrowthMethod method = GrowthMethod::Both;
  double regression = 0;
  double bisection = 0;
  double tilt = 0;  // exponential tilt applied before the regression
  bool consistent = true;

  nlohmann::json to_json() const;
};

// Items need not be sorted. log_weights may be empty (unit weights).
// Everything below complete_below is assumed present; the window is taken
// relative to it (or to the largest value when it is infinite).
GrowthEstimate growth_rate(std::span<const double> values, std::span<const double> log_weights,
                           double complete_below, const WindowPolicy& policy = {});
GrowthEstimate growth_rate(const CountingFunction& counting, const WindowPolicy& policy = {});

GrowthEstimate entropy(const SpectrumTable& table, std::size_t column, const WindowPolicy& policy = {});

// Presorted variant used by the curve sampler: values ascending.
GrowthEstimate growth_rate_sorted(std::span<const double> values, std::span<const double> log_weights,
                                  double complete_below, const WindowPolicy& policy);

}  // namespace corrnum
