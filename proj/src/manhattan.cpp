#include "corrnum/manhattan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

namespace corrnum {

using nlohmann::json;

namespace {

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace

QuadraticFit ManhattanCurve::local_fit(double b) const {
  const std::size_t n = samples.size();
  const std::size_t w = std::min<std::size_t>(stencil, n);
  if (w < 3) throw Error(Errc::InsufficientData, "curve needs at least three samples");
  // nearest sample, then centre the stencil on it
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(samples[i].b - b) < std::abs(samples[nearest].b - b)) nearest = i;
  }
  std::size_t start = nearest >= w / 2 ? nearest - w / 2 : 0;
  start = std::min(start, n - w);
  std::vector<double> x(w), y(w);
  for (std::size_t k = 0; k < w; ++k) {
    x[k] = samples[start + k].b;
    y[k] = samples[start + k].a;
  }
  return fit_quadratic(x, y, b);
}

std::string ManhattanCurve::to_csv() const {
  std::string out = "b,a,stderr\n";
  for (const auto& s : samples) out += format_double(s.b) + "," + format_double(s.a) + "," + format_double(s.stderr_) + "\n";
  return out;
}

json ManhattanCurve::to_json() const {
  json pts = json::array();
  for (const auto& s : samples) pts.push_back({s.b, s.a, s.stderr_});
  return {{"label1", label1},
          {"label2", label2},
          {"h1", h1.to_json()},
          {"h2", h2.to_json()},
          {"samples", pts},
          {"convexity_certificate", convexity_certificate},
          {"a_at_zero", a_at_zero},
          {"root_b", root_b},
          {"decreasing", decreasing},
          {"convex", convex},
          {"stencil", stencil}};
}

Proportionality proportionality(std::span<const double> l1, std::span<const double> l2, double tolerance) {
  if (l1.size() != l2.size()) throw Error(Errc::InvalidArgument, "column lengths differ");
  CompensatedSum<> s12, s22;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    s12 += l1[i] * l2[i];
    s22 += l2[i] * l2[i];
  }
  Proportionality p;
  p.kappa = s22.value() > 0 ? s12.value() / s22.value() : 0;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    p.max_relative_deviation =
        std::max(p.max_relative_deviation, std::abs(l1[i] - p.kappa * l2[i]) / std::max(1.0, std::abs(l1[i])));
  }
  p.proportional = p.max_relative_deviation <= tolerance;
  return p;
}

ManhattanCurve sample_curve(const SpectrumTable& table, std::size_t col1, std::size_t col2, const CurveOptions& opts) {
  const auto l1 = table.column(col1);
  const auto l2 = table.column(col2);
  if (!opts.allow_proportional) {
    const auto p = proportionality(l1, l2);
    if (p.proportional) {
      throw Error(Errc::ProportionalSpectra, "proportional spectra: " + table.columns()[col1].name() + " = " +
                                                 format_double(p.kappa) + " * " + table.columns()[col2].name());
    }
  }
  ManhattanCurve curve;
  curve.label1 = table.columns()[col1].name();
  curve.label2 = table.columns()[col2].name();
  curve.fit_residual_limit = opts.fit_residual_limit;
  curve.h1 = entropy(table, col1, opts.window);
  curve.h2 = entropy(table, col2, opts.window);
  const double h2 = curve.h2.value;
  std::vector<double> grid = opts.b_grid.empty() ? linspace(opts.b_lo * h2, opts.b_hi * h2, opts.grid_points) : opts.b_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.size() < 5) throw Error(Errc::InvalidArgument, "b grid needs at least 5 points");

  const double t1 = completeness_bound(table, l1);
  std::vector<std::size_t> order(l1.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return l1[i] < l1[j]; });
  std::vector<double> v1(order.size()), v2(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    v1[k] = l1[order[k]];
    v2[k] = l2[order[k]];
  }
  curve.samples.resize(grid.size());
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    std::vector<double> lw(v2.size());
    for (std::size_t k = 0; k < v2.size(); ++k) lw[k] = -grid[i] * v2[k];
    const GrowthEstimate e = growth_rate_sorted(v1, lw, t1, opts.window);
    curve.samples[i] = {grid[i], e.value, e.stderr_};
  });

  const auto& s = curve.samples;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (!(s[i + 1].a < s[i].a)) curve.decreasing = false;
  }
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double left = (s[i].a - s[i - 1].a) / (s[i].b - s[i - 1].b);
    const double right = (s[i + 1].a - s[i].a) / (s[i + 1].b - s[i].b);
    const double d2 = (right - left) * 0.5 * (s[i + 1].b - s[i - 1].b);
    curve.convexity_certificate = std::max(curve.convexity_certificate, -d2);
  }
  curve.convex = curve.convexity_certificate <= opts.convexity_tolerance;
  curve.a_at_zero = curve.value(0.0);

  curve.root_b = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i].a > 0 && s[i + 1].a <= 0) {
      double lo = s[i].b, hi = s[i + 1].b;
      for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (curve.value(mid) > 0) lo = mid; else hi = mid;
      }
      curve.root_b = 0.5 * (lo + hi);
      break;
    }
  }
  return curve;
}

PressureIntersections pressure_intersections(const ManhattanCurve& curve) {
  if (!std::isfinite(curve.root_b)) {
    throw Error(Errc::EndpointFitUnstable, "curve does not cross a = 0 inside the sampled b range");
  }
  PressureIntersections p;
  const QuadraticFit f1 = curve.local_fit(0.0);
  const QuadraticFit f2 = curve.local_fit(curve.root_b);
  p.residual_h1 = f1.residual_rms;
  p.residual_h2 = f2.residual_rms;
  if (p.residual_h1 > curve.fit_residual_limit || p.residual_h2 > curve.fit_residual_limit) {
    throw Error(Errc::EndpointFitUnstable, "endpoint quadratic fit residual " +
                                               format_double(std::max(p.residual_h1, p.residual_h2)) +
                                               " exceeds " + format_double(curve.fit_residual_limit));
  }
  p.slope_at_h1 = f1.derivative(0.0);
  p.slope_at_h2 = f2.derivative(curve.root_b);
  if (!(p.slope_at_h1 < 0) || !(p.slope_at_h2 < 0)) {
    throw Error(Errc::EndpointFitUnstable, "curve is not decreasing at an endpoint");
  }
  const double h1 = curve.h1.value;
  const double h2 = curve.h2.value;
  p.I_12 = -p.slope_at_h1;
  p.I_21 = -1.0 / p.slope_at_h2;
  p.J_12 = h2 / h1 * p.I_12;
  p.J_21 = h1 / h2 * p.I_21;
  return p;
}

TangentPoint correlation_tangent(const ManhattanCurve& curve) {
  TangentPoint t;
  const double h1 = curve.h1.value;
  const double h2 = curve.h2.value;
  t.target_slope = -h1 / h2;
  const auto& s = curve.samples;
  // slope is nondecreasing along a convex curve
  auto g = [&](double b) { return curve.slope(b) - t.target_slope; };
  // a straight curve has no tangent point; roundoff alone must not bracket one
  const double spread = curve.slope(s.back().b) - curve.slope(s.front().b);
  if (!(spread > 1e-9 * std::abs(t.target_slope))) {
    throw Error(Errc::SlopeNotBracketed, "curve has constant slope " + format_double(curve.slope(s.front().b)));
  }
  std::size_t bracket = s.size();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (g(s[i].b) <= 0 && g(s[i + 1].b) > 0) {
      bracket = i;
      break;
    }
  }
  if (bracket == s.size()) {
    throw Error(Errc::SlopeNotBracketed, "slope " + format_double(t.target_slope) + " lies outside the sampled range [" +
                                             format_double(curve.slope(s.front().b)) + ", " +
                                             format_double(curve.slope(s.back().b)) + "]");
  }
  double lo = s[bracket].b, hi = s[bracket + 1].b;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) <= 0) lo = mid; else hi = mid;
  }
  t.b = 0.5 * (lo + hi);
  t.a = curve.value(t.b);
  t.M = t.a / h1 + t.b / h2;
  return t;
}

MinsResult correlation_mins(const SpectrumTable& table, std::size_t col1, std::size_t col2, double h1, double h2,
                            const WindowPolicy& window) {
  if (!(h1 > 0) || !(h2 > 0)) throw Error(Errc::InvalidArgument, "entropies must be positive");
  MinsResult r;
  double last_stderr = 0;
  auto objective = [&](double s) {
    std::vector<double> w(table.num_columns(), 0.0);
    w[col1] += s * h1;
    w[col2] += (1 - s) * h2;
    std::vector<double> mixed = combine_columns(table, w);
    const double bound = completeness_bound(table, mixed);
    const GrowthEstimate e = growth_rate(CountingFunction(std::move(mixed), bound), window);
    r.evaluations.emplace_back(s, e.value);
    last_stderr = e.stderr_;
    return e.value;
  };
  r.at_zero = objective(0.0);
  r.at_one = objective(1.0);
  const double invphi = (std::sqrt(5.0) - 1) / 2;
  double lo = 0.02, hi = 0.98;
  const double f_lo = objective(lo);
  const double f_hi = objective(hi);
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > 1e-4) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = objective(x2);
    }
  }
  r.s0 = 0.5 * (lo + hi);
  r.M = objective(r.s0);
  r.stderr_ = last_stderr;
  double fmax = std::max(f_lo, f_hi), fmin = r.M;
  for (const auto& [s, f] : r.evaluations) {
    if (s < 0.02 || s > 0.98) continue;
    fmax = std::max(fmax, f);
    fmin = std::min(fmin, f);
  }
  if (fmax - fmin < 2 * r.stderr_) {
    throw Error(Errc::FlatObjective, "mixed growth varies by " + format_double(fmax - fmin) + " < 2 stderr");
  }
  return r;
}

std::size_t window_count(std::span<const double> l1, std::span<const double> l2, double h1, double h2, double x,
                         double eps, WindowMode mode) {
  const double w1 = mode == WindowMode::Renormalized ? h1 * eps : eps;
  const double w2 = mode == WindowMode::Renormalized ? h2 * eps : eps;
  std::size_t count = 0;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    const double a = h1 * l1[i];
    const double b = h2 * l2[i];
    if (a > x && a < x + w1 && b > x && b < x + w2) ++count;
  }
  return count;
}

CountFit correlation_count(const SpectrumTable& table, std::size_t col1, std::size_t col2, double h1, double h2,
                           const CountOptions& opts) {
  if (!(opts.epsilon > 0)) throw Error(Errc::InvalidArgument, "epsilon must be positive");
  const auto l1 = table.column(col1);
  const auto l2 = table.column(col2);
  CountFit fit;
  fit.epsilon = opts.epsilon;
  fit.x = opts.x_grid;
  if (fit.x.empty()) {
    const double t = std::min(h1 * completeness_bound(table, l1), h2 * completeness_bound(table, l2));
    fit.x = linspace(opts.lo_fraction * t, opts.hi_fraction * t, opts.grid_points);
  }
  std::vector<double> xs, ys, ws;
  for (double x : fit.x) {
    const std::size_t c = window_count(l1, l2, h1, h2, x, opts.epsilon, opts.mode);
    fit.counts.push_back(c);
    if (c > 0 && x > 0) {
      xs.push_back(x);
      ys.push_back(std::log(static_cast<double>(c)) + 1.5 * std::log(x));
      ws.push_back(static_cast<double>(c));  // var(log count) ~ 1 / count
    }
  }
  if (xs.size() < 5) {
    throw Error(Errc::EmptyWindows, std::to_string(xs.size()) + " of " + std::to_string(fit.x.size()) +
                                        " windows hold classes, need 5");
  }
  const LineFit line = fit_line(xs, ys, ws);
  fit.M = line.slope;
  fit.C = std::exp(line.intercept);
  fit.C_over_eps2 = fit.C / (opts.epsilon * opts.epsilon);
  fit.residual_rms = line.residual_rms;
  fit.slope_stderr = line.slope_stderr;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    const double x = fit.x[i];
    fit.residuals.push_back(fit.counts[i] > 0 && x > 0
                                ? std::log(static_cast<double>(fit.counts[i])) + 1.5 * std::log(x) -
                                      (line.intercept + line.slope * x)
                                : std::numeric_limits<double>::quiet_NaN());
  }
  return fit;
}

RawWindowReport raw_window_vanishing(const SpectrumTable& table, std::size_t col1, std::size_t col2, double h1,
                                     double h2, double eps, int grid_points) {
  if (!(eps > 0)) throw Error(Errc::InvalidArgument, "epsilon must be positive");
  const auto l1 = table.column(col1);
  const auto l2 = table.column(col2);
  RawWindowReport r;
  r.epsilon = eps;
  r.entropy_ratio = h2 / h1;
  r.data_limit = std::min(completeness_bound(table, l1), completeness_bound(table, l2)) - eps;
  if (!(r.data_limit > 0)) throw Error(Errc::InsufficientData, "no complete raw windows");
  // A class lands in the window at x iff max(l1,l2) - eps <= x < min(l1,l2).
  r.threshold = 0;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    if (std::abs(l1[i] - l2[i]) < eps && std::max(l1[i], l2[i]) < r.data_limit + eps) {
      r.threshold = std::max(r.threshold, std::min(l1[i], l2[i]));
    }
  }
  r.x = linspace(r.data_limit / grid_points, r.data_limit, grid_points);
  for (double x : r.x) r.counts.push_back(window_count(l1, l2, 1.0, 1.0, x, eps, WindowMode::EqualWidth));
  r.vanishes = r.threshold < r.data_limit;
  return r;
}

json CorrelationReport::to_json() const {
  json counts = json::array();
  for (std::size_t i = 0; i < count.x.size(); ++i) {
    counts.push_back({{"x", count.x[i]},
                      {"count", count.counts[i]},
                      {"residual", std::isfinite(count.residuals[i]) ? json(count.residuals[i]) : json(nullptr)}});
  }
  json evals = json::array();
  for (const auto& [s, f] : mins.evaluations) evals.push_back({s, f});
  return {{"label1", label1},
          {"label2", label2},
          {"h1", curve.h1.to_json()},
          {"h2", curve.h2.to_json()},
          {"curve",
           {{"a_at_zero", curve.a_at_zero},
            {"root_b", curve.root_b},
            {"convexity_certificate", curve.convexity_certificate},
            {"decreasing", curve.decreasing},
            {"convex", curve.convex}}},
          {"I_12", intersections.I_12},
          {"I_21", intersections.I_21},
          {"J_12", intersections.J_12},
          {"J_21", intersections.J_21},
          {"endpoint_residuals", {intersections.residual_h1, intersections.residual_h2}},
          {"M_tangent", tangent.M},
          {"tangent_point", {tangent.a, tangent.b}},
          {"M_mins", mins.M},
          {"s0", mins.s0},
          {"mins_stderr", mins.stderr_},
          {"mins_growth_at_s0_s1", {mins.at_zero, mins.at_one}},
          {"mins_evaluations", evals},
          {"M_countfit", count.M},
          {"C_countfit", count.C},
          {"C_over_eps2", count.C_over_eps2},
          {"countfit_residual_rms", count.residual_rms},
          {"countfit_slope_stderr", count.slope_stderr},
          {"epsilon", count.epsilon},
          {"windows", counts},
          {"point_on_curve_residual", point_on_curve_residual},
          {"consistency",
           {{"tangent_mins", tangent_mins_consistent},
            {"countfit", countfit_consistent},
            {"in_unit_interval", in_unit_interval},
            {"j_inequality", j_inequality}}}};
}

CorrelationReport correlate(const SpectrumTable& table, std::size_t col1, std::size_t col2,
                            const CorrelationOptions& opts) {
  CorrelationReport r;
  r.curve = sample_curve(table, col1, col2, opts.curve);
  r.label1 = r.curve.label1;
  r.label2 = r.curve.label2;
  const double h1 = r.curve.h1.value;
  const double h2 = r.curve.h2.value;
  r.intersections = pressure_intersections(r.curve);
  r.tangent = correlation_tangent(r.curve);
  r.mins = correlation_mins(table, col1, col2, h1, h2, opts.curve.window);
  r.count = correlation_count(table, col1, col2, h1, h2, opts.count);
  const double pb = (1 - r.mins.s0) * h2 * r.mins.M;
  const double pa = r.mins.s0 * h1 * r.mins.M;
  r.point_on_curve_residual = std::abs(r.curve.value(pb) - pa);
  r.tangent_mins_consistent = std::abs(r.tangent.M - r.mins.M) <= opts.tangent_mins_tolerance;
  r.countfit_consistent = std::abs(r.count.M - r.tangent.M) <= opts.countfit_tolerance;
  auto unit = [](double m) { return m > 0 && m < 1; };
  r.in_unit_interval = unit(r.tangent.M) && unit(r.mins.M) && unit(r.count.M);
  r.j_inequality = r.intersections.J_12 >= 1 - 0.02 && r.intersections.J_21 >= 1 - 0.02;
  return r;
}

std::vector<PinchingStep> pinching_demo(const PinchingOptions& opts) {
  for (std::size_t i = 1; i < opts.epsilons.size(); ++i) {
    if (!(opts.epsilons[i] < opts.epsilons[i - 1])) throw Error(Errc::InvalidArgument, "epsilon list must decrease");
  }
  std::vector<PinchingStep> steps;
  for (double eps : opts.epsilons) {
    const Representation rho = schottky_pair(eps, opts.K, opts.angle);
    const Representation eta = schottky_pair(opts.K, eps, opts.angle);
    const auto f = LengthFunctional::alpha(1, 2);
    PinchingStep step;
    step.epsilon = eps;
    try {
      SpectrumTable table = compute_spectrum({{rho, f}, {eta, f}}, opts.spectrum);
      step.loxodromy = table.meta().value("loxodromy", json::object());
      step.report = correlate(table, 0, 1, opts.correlation);
      const double w[2] = {step.report.curve.h1.value, step.report.curve.h2.value};
      step.sum_systole = systole(CountingFunction(combine_columns(table, w)));
    } catch (const Error& e) {
      step.error = e.what();
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

json pinching_to_json(const std::vector<PinchingStep>& steps) {
  json out = json::array();
  for (const auto& s : steps) {
    if (!s.error.empty()) {
      out.push_back({{"epsilon", s.epsilon}, {"error", s.error}, {"loxodromy", s.loxodromy}});
      continue;
    }
    out.push_back({{"epsilon", s.epsilon},
                   {"M_tangent", s.report.tangent.M},
                   {"M_mins", s.report.mins.M},
                   {"M_countfit", s.report.count.M},
                   {"sum_systole", s.sum_systole},
                   {"loxodromy", s.loxodromy},
                   {"report", s.report.to_json()}});
  }
  return out;
}

}  // namespace corrnum
