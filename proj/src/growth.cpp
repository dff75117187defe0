#include "corrnum/growth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrnum/numeric.hpp"

namespace corrnum {

std::string to_string(GrowthMethod m) {
  switch (m) {
    case GrowthMethod::Regression: return "regression";
    case GrowthMethod::Bisection: return "bisection";
    case GrowthMethod::Both: return "both";
  }
  return "both";
}

nlohmann::json GrowthEstimate::to_json() const {
  return {{"value", value},         {"stderr", stderr_},       {"window", {t_lo, t_hi}},
          {"count", sample_count},  {"method", to_string(method)}, {"regression", regression},
          {"bisection", bisection}, {"tilt", tilt},            {"consistent", consistent}};
}

namespace {

// Items are weighted by value * weight: under a prime-orbit type law
// #{l <= T} ~ e^{gT}/(gT) this cancels the 1/T factor, so the mass density
// is a pure exponential.
struct Window {
  std::span<const double> v;
  std::span<const double> lw;
  std::size_t begin = 0;  // first index inside [t_lo, t_hi]
  std::size_t end = 0;    // one past the last
  double log_mass(std::size_t i) const { return std::log(v[i]) + (lw.empty() ? 0.0 : lw[i]); }
};

// Tilted mean of the window values under weights mass * e^{-s v}; also the
// variance, which is minus the derivative in s.
std::pair<double, double> tilted_moments(const Window& w, double s, int skip_block, int blocks) {
  double ref = -std::numeric_limits<double>::infinity();
  for (std::size_t i = w.begin; i < w.end; ++i) {
    if (skip_block >= 0 && static_cast<int>(i % blocks) == skip_block) continue;
    ref = std::max(ref, w.log_mass(i) - s * w.v[i]);
  }
  CompensatedSum<double> z, m1, m2;
  const double shift = w.v[w.begin];
  for (std::size_t i = w.begin; i < w.end; ++i) {
    if (skip_block >= 0 && static_cast<int>(i % blocks) == skip_block) continue;
    const double p = std::exp(w.log_mass(i) - s * w.v[i] - ref);
    const double x = w.v[i] - shift;
    z.add(p);
    m1.add(p * x);
    m2.add(p * x * x);
  }
  const double mean = m1.value() / z.value();
  const double var = std::max(0.0, m2.value() / z.value() - mean * mean);
  return {mean + shift, var};
}

// Root of tilted_mean(s) = center; the mean is strictly decreasing in s.
double mean_centering(const Window& w, double center, int skip_block, int blocks) {
  const double width = w.v[w.end - 1] - w.v[w.begin];
  double lo = -1.0 / width;
  double hi = 1.0 / width;
  auto f = [&](double s) { return tilted_moments(w, s, skip_block, blocks).first - center; };
  for (int k = 0; f(lo) < 0; ++k) {
    if (k > 80) throw Error(Errc::WindowDegenerate, "growth bisection failed to bracket");
    lo = 2 * lo - hi;
  }
  for (int k = 0; f(hi) > 0; ++k) {
    if (k > 80) throw Error(Errc::WindowDegenerate, "growth bisection failed to bracket");
    hi = 2 * hi - lo;
  }
  // Newton steps safeguarded by the bracket.
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(s)); ++it) {
    const auto [mean, var] = tilted_moments(w, s, skip_block, blocks);
    const double fs = mean - center;
    if (fs > 0) lo = s; else hi = s;
    double next = var > 0 ? s + fs / var : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-12 * std::max(1.0, std::abs(s))) {
      s = next;
      break;
    }
    s = next;
  }
  return s;
}

// Slope of log(cumulative tilted mass) against value, sampled at each
// distinct value inside the window.
double cumulative_slope(const Window& w, double tilt, int skip_block, int blocks) {
  double ref = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.end; ++i) ref = std::max(ref, w.log_mass(i) + tilt * w.v[i]);
  CompensatedSum<double> total;
  std::vector<double> xs, ys;
  xs.reserve(w.end - w.begin);
  ys.reserve(w.end - w.begin);
  for (std::size_t i = 0; i < w.end; ++i) {
    if (!(skip_block >= 0 && static_cast<int>(i % blocks) == skip_block)) {
      total.add(std::exp(w.log_mass(i) + tilt * w.v[i] - ref));
    }
    if (i < w.begin) continue;
    // close tie groups; equal lengths reached by different products may differ by roundoff
    if (i + 1 < w.end && w.v[i + 1] - w.v[i] <= 1e-9 * w.v[i]) continue;
    if (!(total.value() > 0)) continue;
    xs.push_back(w.v[i]);
    ys.push_back(std::log(total.value()));
  }
  if (xs.size() < 2) throw Error(Errc::WindowDegenerate, "growth window holds fewer than two distinct values");
  return fit_line(xs, ys).slope;
}

}  // namespace

GrowthEstimate growth_rate_sorted(std::span<const double> values, std::span<const double> log_weights,
                                  double complete_below, const WindowPolicy& policy) {
  if (!log_weights.empty() && log_weights.size() != values.size()) {
    throw Error(Errc::InvalidArgument, "weights must match values");
  }
  if (values.empty()) throw Error(Errc::InsufficientData, "no values");
  if (!(values.front() > 0)) throw Error(Errc::InvalidArgument, "growth rate needs positive values");
  const double t_ref = std::isfinite(complete_below) ? complete_below : values.back();
  GrowthEstimate est;
  est.t_lo = policy.t_lo.value_or(policy.lo_fraction * t_ref);
  est.t_hi = policy.t_hi.value_or(policy.hi_fraction * t_ref);
  if (!(est.t_lo > 0) || !(est.t_lo < est.t_hi) || !std::isfinite(est.t_hi)) {
    throw Error(Errc::WindowDegenerate, "growth window [" + format_double(est.t_lo) + ", " + format_double(est.t_hi) +
                                            "] is degenerate");
  }
  Window w{values, log_weights};
  w.begin = static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), est.t_lo) - values.begin());
  w.end = static_cast<std::size_t>(std::upper_bound(values.begin(), values.end(), est.t_hi) - values.begin());
  est.sample_count = w.end > w.begin ? w.end - w.begin : 0;
  if (est.sample_count < policy.min_items) {
    throw Error(Errc::InsufficientData, std::to_string(est.sample_count) + " items in growth window, need " +
                                            std::to_string(policy.min_items));
  }
  const double a = values[w.begin];
  const double b = values[w.end - 1];
  if (!(a < b)) throw Error(Errc::WindowDegenerate, "all window values coincide");
  const double center = 0.5 * (a + b);
  const int blocks = std::max(2, policy.jackknife_blocks);

  est.bisection = mean_centering(w, center, -1, blocks);
  // Tilt so the cumulative is dominated by its recent terms: g * a = 8.
  est.tilt = 8.0 / a - est.bisection;
  est.regression = cumulative_slope(w, est.tilt, -1, blocks) - est.tilt;

  std::vector<double> jack(blocks);
  for (int k = 0; k < blocks; ++k) jack[k] = cumulative_slope(w, est.tilt, k, blocks) - est.tilt;
  const double mean = std::accumulate(jack.begin(), jack.end(), 0.0) / blocks;
  double ss = 0;
  for (double j : jack) ss += (j - mean) * (j - mean);
  est.stderr_ = std::sqrt(ss * (blocks - 1) / blocks);

  est.method = GrowthMethod::Both;
  est.value = est.regression;
  est.consistent = std::abs(est.regression - est.bisection) <= std::max(3 * est.stderr_, 0.02);
  return est;
}

GrowthEstimate growth_rate(std::span<const double> values, std::span<const double> log_weights, double complete_below,
                           const WindowPolicy& policy) {
  if (!log_weights.empty() && log_weights.size() != values.size()) {
    throw Error(Errc::InvalidArgument, "weights must match values");
  }
  if (std::is_sorted(values.begin(), values.end())) return growth_rate_sorted(values, log_weights, complete_below, policy);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> v(values.size()), lw(log_weights.empty() ? 0 : values.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    v[k] = values[order[k]];
    if (!lw.empty()) lw[k] = log_weights[order[k]];
  }
  return growth_rate_sorted(v, lw, complete_below, policy);
}

GrowthEstimate growth_rate(const CountingFunction& counting, const WindowPolicy& policy) {
  return growth_rate_sorted(counting.values(), {}, counting.complete_below(), policy);
}

GrowthEstimate entropy(const SpectrumTable& table, std::size_t column, const WindowPolicy& policy) {
  return growth_rate(counting(table, column), policy);
}

}  // namespace corrnum
