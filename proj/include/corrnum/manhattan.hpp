#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "corrnum/growth.hpp"
#include "corrnum/numeric.hpp"
#include "corrnum/spectrum.hpp"

namespace corrnum {

struct CurveSample {
  double b = 0;
  double a = 0;
  double stderr_ = 0;
};

struct CurveOptions {
  std::vector<double> b_grid;  // empty: grid_points over [b_lo, b_hi] * h2
  int grid_points = 33;
  double b_lo = -0.1;
  double b_hi = 1.1;
  WindowPolicy window;
  double convexity_tolerance = 5e-3;
  double fit_residual_limit = 0.02;  // EndpointFitUnstable above this
  bool allow_proportional = false;   // test mode
  int threads = 1;
};

// Samples (b, a(b)) with a(b) the growth of sum e^{-b l2} filtered by l1.
struct ManhattanCurve {
  std::vector<CurveSample> samples;
  GrowthEstimate h1, h2;
  std::string label1, label2;
  double convexity_certificate = 0;  // largest negative second difference, as a positive number
  double a_at_zero = 0;              // interpolated
  double root_b = 0;                 // interpolated zero of a
  bool decreasing = true;
  bool convex = true;
  double fit_residual_limit = 0.02;
  int stencil = 5;

  // Local quadratic through the `stencil` samples nearest to b.
  QuadraticFit local_fit(double b) const;
  double value(double b) const { return local_fit(b).value(b); }
  double slope(double b) const { return local_fit(b).derivative(b); }

  nlohmann::json to_json() const;
  std::string to_csv() const;  // b,a,stderr
};

// Best-fit ratio kappa in l1 ~ kappa l2 and the largest relative deviation.
struct Proportionality {
  double kappa = 0;
  double max_relative_deviation = 0;
  bool proportional = false;
};
Proportionality proportionality(std::span<const double> l1, std::span<const double> l2, double tolerance = 1e-9);

ManhattanCurve sample_curve(const SpectrumTable& table, std::size_t col1, std::size_t col2,
                            const CurveOptions& opts = {});

struct PressureIntersections {
  double I_12 = 0, I_21 = 0, J_12 = 0, J_21 = 0;
  double slope_at_h1 = 0;  // da/db at b = 0
  double slope_at_h2 = 0;  // da/db at the root
  double residual_h1 = 0, residual_h2 = 0;
};
PressureIntersections pressure_intersections(const ManhattanCurve& curve);

struct TangentPoint {
  double M = 0;
  double a = 0, b = 0;
  double target_slope = 0;  // -h1/h2 in da/db
};
TangentPoint correlation_tangent(const ManhattanCurve& curve);

struct MinsResult {
  double M = 0;
  double s0 = 0;
  double stderr_ = 0;
  double at_zero = 0;  // growth at s = 0 (renormalised column 2)
  double at_one = 0;
  std::vector<std::pair<double, double>> evaluations;  // (s, growth)
};
MinsResult correlation_mins(const SpectrumTable& table, std::size_t col1, std::size_t col2, double h1, double h2,
                            const WindowPolicy& window = {});

enum class WindowMode { Renormalized, EqualWidth };

struct CountOptions {
  double epsilon = 0.2;
  std::vector<double> x_grid;  // empty: 12 points over [0.35, 0.8] * min(h1 T1, h2 T2)
  int grid_points = 12;
  double lo_fraction = 0.35;
  double hi_fraction = 0.8;
  WindowMode mode = WindowMode::Renormalized;
};

struct CountFit {
  double M = 0;
  double C = 0;
  double C_over_eps2 = 0;
  double residual_rms = 0;
  double slope_stderr = 0;
  double epsilon = 0;
  std::vector<double> x;
  std::vector<std::size_t> counts;
  std::vector<double> residuals;  // NaN where the count is zero
};

// Classes with h1 l1 in (x, x + h1 eps) and h2 l2 in (x, x + h2 eps).
std::size_t window_count(std::span<const double> l1, std::span<const double> l2, double h1, double h2, double x,
                         double eps, WindowMode mode = WindowMode::Renormalized);
CountFit correlation_count(const SpectrumTable& table, std::size_t col1, std::size_t col2, double h1, double h2,
                           const CountOptions& opts = {});

// Raw (not renormalised) windows l1, l2 in (x, x + eps).
struct RawWindowReport {
  double epsilon = 0;
  std::vector<double> x;
  std::vector<std::size_t> counts;
  double threshold = 0;       // every window starting beyond this is empty
  double data_limit = 0;      // windows are only meaningful below this
  bool vanishes = false;      // threshold < data_limit
  double entropy_ratio = 0;   // h2 / h1
};
RawWindowReport raw_window_vanishing(const SpectrumTable& table, std::size_t col1, std::size_t col2, double h1,
                                     double h2, double eps, int grid_points = 24);

struct CorrelationOptions {
  CurveOptions curve;
  CountOptions count;
  double tangent_mins_tolerance = 0.02;
  double countfit_tolerance = 0.1;
};

struct CorrelationReport {
  std::string label1, label2;
  ManhattanCurve curve;
  PressureIntersections intersections;
  TangentPoint tangent;
  MinsResult mins;
  CountFit count;
  double point_on_curve_residual = 0;
  bool tangent_mins_consistent = false;
  bool countfit_consistent = false;
  bool in_unit_interval = false;
  bool j_inequality = false;

  nlohmann::json to_json() const;
};

CorrelationReport correlate(const SpectrumTable& table, std::size_t col1, std::size_t col2,
                            const CorrelationOptions& opts = {});

struct PinchingStep {
  double epsilon = 0;
  CorrelationReport report;
  double sum_systole = 0;  // systole of h1 l1 + h2 l2
  nlohmann::json loxodromy;
  std::string error;  // set when this step could not be estimated; report is then empty
};

struct PinchingOptions {
  std::vector<double> epsilons{1.0, 0.5, 0.25};
  double K = 3.0;
  double angle = 1.5707963267948966;
  SpectrumOptions spectrum;
  CorrelationOptions correlation;
};

// Library errors inside one step are recorded on the step, not thrown.
std::vector<PinchingStep> pinching_demo(const PinchingOptions& opts);
nlohmann::json pinching_to_json(const std::vector<PinchingStep>& steps);

}  // namespace corrnum
