#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "corrnum/manhattan.hpp"

using namespace corrnum;

namespace {

constexpr double kPi = std::numbers::pi;

const SpectrumTable& pair_table() {
  static const SpectrumTable t = [] {
    SpectrumOptions o;
    o.n_max = 12;
    const auto f = LengthFunctional::alpha(1, 2);
    return compute_spectrum({{schottky_pair(2.3, 3.1, kPi / 2), f}, {schottky_pair(3.1, 2.3, 0.45 * kPi), f}}, o);
  }();
  return t;
}

// Further apart, so the tangent slope is bracketed at this cutoff.
const SpectrumTable& distinct_table() {
  static const SpectrumTable t = [] {
    SpectrumOptions o;
    o.n_max = 12;
    const auto f = LengthFunctional::alpha(1, 2);
    return compute_spectrum({{schottky_pair(2.0, 3.6, kPi / 2), f}, {schottky_pair(3.4, 2.2, 0.45 * kPi), f}}, o);
  }();
  return t;
}

// Table with the first pair column and `factor` times it.
SpectrumTable scaled_copy(double factor) {
  const auto& src = pair_table();
  SpectrumTable t(2, src.n_max(), true, {src.columns()[0]});
  for (std::size_t i = 0; i < src.rows(); ++i) {
    const double v = src.column(0)[i];
    t.append_row(src.word(i), src.primitive(i), std::span<const double>(&v, 1));
  }
  std::vector<double> scaled(src.column(0).begin(), src.column(0).end());
  for (double& x : scaled) x *= factor;
  t.add_column({"scaled", "alpha1"}, scaled);
  return t;
}

ManhattanCurve synthetic_curve(double h1, double h2, double (*a)(double, double, double)) {
  ManhattanCurve c;
  c.h1.value = h1;
  c.h2.value = h2;
  for (int i = 0; i <= 40; ++i) {
    const double b = -0.1 * h2 + 1.2 * h2 * i / 40;
    c.samples.push_back({b, a(b, h1, h2), 0.0});
  }
  c.a_at_zero = c.value(0.0);
  c.root_b = h2;
  return c;
}

CurveOptions test_curve_options() {
  CurveOptions o;
  o.window.min_items = 100;
  return o;
}

}  // namespace

TEST_CASE("identical columns give the line a = h - b") {
  const auto t = scaled_copy(1.0);
  auto o = test_curve_options();
  CHECK_THROWS_AS(sample_curve(t, 0, 1, o), Error);
  o.allow_proportional = true;
  const auto c = sample_curve(t, 0, 1, o);
  double dev = 0;
  for (const auto& s : c.samples) dev = std::max(dev, std::abs(s.a - (c.h1.value - s.b)));
  CHECK(dev <= 0.01);
  CHECK(c.convex);
}

TEST_CASE("doubled column gives a = h - 2b") {
  auto o = test_curve_options();
  o.allow_proportional = true;
  const auto c = sample_curve(scaled_copy(2.0), 0, 1, o);
  double dev = 0;
  for (const auto& s : c.samples) dev = std::max(dev, std::abs(s.a - (c.h1.value - 2 * s.b)));
  CHECK(dev <= 0.01);
  const auto p = pressure_intersections(c);
  CHECK(std::abs(p.I_12 - 2.0) < 0.02);
}

TEST_CASE("intersection of an exact line") {
  const auto c = synthetic_curve(1.0, 0.5, [](double b, double h1, double) { return h1 - 2 * b; });
  const auto p = pressure_intersections(c);
  CHECK(p.I_12 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.J_12 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.J_21 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(correlation_tangent(c), Error);
}

TEST_CASE("tangent point of a parabola") {
  // a = h1 (1 - b/h2)^2 has slope -h1/h2 at b = h2/2, where a = h1/4
  const auto c = synthetic_curve(0.6, 0.9, [](double b, double h1, double h2) {
    return h1 * (1 - b / h2) * (1 - b / h2);
  });
  const auto t = correlation_tangent(c);
  CHECK(t.b == doctest::Approx(0.45).epsilon(1e-9));
  CHECK(t.M == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("proportionality detection") {
  std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{2, 4, 6.1};
  CHECK(proportionality(a, b).proportional);
  CHECK(proportionality(a, b).kappa == doctest::Approx(0.5));
  CHECK_FALSE(proportionality(a, c).proportional);
}

TEST_CASE("toy window count") {
  std::vector<double> l1{3.0, 3.05, 5.0}, l2{3.1, 4.0, 5.0};
  CHECK(window_count(l1, l2, 1.0, 1.0, 2.95, 0.2) == 1);
  CHECK(window_count(l1, l2, 1.0, 1.0, 4.9, 0.2) == 1);
  CHECK(window_count(l1, l2, 1.0, 1.0, 5.0, 0.2) == 0);  // open intervals
}

TEST_CASE("property: window counts equal a full recount") {
  const auto& t = pair_table();
  const auto l1 = t.column(0), l2 = t.column(1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(1.0, 6.0), ue(0.05, 1.0), uh(0.3, 0.7);
  for (int trial = 0; trial < 20; ++trial) {
    const double x = ux(rng), eps = ue(rng), h1 = uh(rng), h2 = uh(rng);
    std::size_t brute = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double u = h1 * l1[i], v = h2 * l2[i];
      if (u > x && u < x + h1 * eps && v > x && v < x + h2 * eps) ++brute;
    }
    CHECK(window_count(l1, l2, h1, h2, x, eps) == brute);
    std::size_t equal = 0, raw = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double u = h1 * l1[i], v = h2 * l2[i];
      if (u > x && u < x + eps && v > x && v < x + eps) ++equal;
      if (l1[i] > x && l1[i] < x + eps && l2[i] > x && l2[i] < x + eps) ++raw;
    }
    CHECK(window_count(l1, l2, h1, h2, x, eps, WindowMode::EqualWidth) == equal);
    CHECK(window_count(l1, l2, 1.0, 1.0, x, eps, WindowMode::EqualWidth) == raw);
  }
}

TEST_CASE("curve of a genuine pair") {
  const auto c = sample_curve(pair_table(), 0, 1, test_curve_options());
  CHECK(std::abs(c.a_at_zero - c.h1.value) < 0.02);
  CHECK(std::abs(c.root_b - c.h2.value) < 0.02);
  CHECK(c.decreasing);
  CHECK(c.convexity_certificate <= 5e-3);
  const auto p = pressure_intersections(c);
  CHECK(p.J_12 >= 0.98);
  CHECK(p.J_21 >= 0.98);
  CHECK(c.to_csv().rfind("b,a,stderr\n", 0) == 0);
}

TEST_CASE("correlation number: bounds, swap symmetry and scale invariance") {
  CorrelationOptions o;
  o.curve = test_curve_options();
  o.count.epsilon = 1.0;
  o.count.grid_points = 48;
  const auto r = correlate(distinct_table(), 0, 1, o);
  CHECK(r.tangent.M > 0);
  CHECK(r.tangent.M < 1);
  CHECK(r.mins.M > 0);
  CHECK(r.mins.M < 1);
  CHECK(std::abs(r.mins.at_zero - 1.0) < 0.02);
  CHECK(std::abs(r.tangent.M - r.mins.M) < 0.02);
  const auto swapped = correlate(distinct_table(), 1, 0, o);
  CHECK(std::abs(swapped.tangent.M - r.tangent.M) < 0.02);

  SpectrumTable scaled = distinct_table();
  std::vector<double> v(scaled.column(1).begin(), scaled.column(1).end());
  for (double& x : v) x *= 1.7;
  scaled.add_column({"scaled", "alpha1"}, v);
  const auto rs = correlate(scaled, 0, 2, o);
  CHECK(std::abs(rs.tangent.M - r.tangent.M) < 0.01);
  CHECK(std::abs(rs.mins.M - r.mins.M) < 0.01);
  const auto j = r.to_json();
  for (const char* key : {"M_tangent", "M_mins", "M_countfit", "J_12", "J_21", "consistency", "windows"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("count fit errors") {
  CountOptions o;
  o.epsilon = 1e-6;
  CHECK_THROWS_AS(correlation_count(pair_table(), 0, 1, 0.5, 0.5, o), Error);
  o.epsilon = -1;
  CHECK_THROWS_AS(correlation_count(pair_table(), 0, 1, 0.5, 0.5, o), Error);
}

TEST_CASE("raw windows on a toy table") {
  // second column twice the first beyond length 2: equal raw lengths only early
  SpectrumTable t(2, 5, true, {{"p", "alpha1"}, {"q", "alpha1"}});
  const std::vector<std::pair<double, double>> rows{{1.0, 1.05}, {1.5, 1.55}, {2.5, 5.0}, {3.0, 6.0}, {4.0, 8.0}};
  int k = 0;
  for (const auto& [a, b] : rows) {
    const double v[2] = {a, b};
    t.append_row(std::string(static_cast<std::size_t>(++k), 'a'), k == 1, v);
  }
  const auto r = raw_window_vanishing(t, 0, 1, 1.0, 0.5, 0.2, 8);
  CHECK(r.threshold == doctest::Approx(1.5));
  CHECK(r.entropy_ratio == doctest::Approx(0.5));
  CHECK(r.data_limit == doctest::Approx(3.8));
  CHECK(r.vanishes);
}
