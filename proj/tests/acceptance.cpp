// Acceptance run at desk scale: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "corrnum/config.hpp"
#include "corrnum/freegroup.hpp"
#include "corrnum/growth.hpp"
#include "corrnum/manhattan.hpp"
#include "corrnum/pipeline.hpp"

using namespace corrnum;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kNMax = 14;

struct NamedPair {
  const char* name;
  double la1, lb1, angle1;  // angles in units of pi
  double la2, lb2, angle2;
};

// Discrete (commutator trace <= -2) and not proportional.
const NamedPair kPairs[] = {
    {"P1", 2.3, 3.1, 0.5, 3.1, 2.3, 0.45},
    {"P2", 2.5, 3.9, 0.45, 3.7, 2.4, 0.55},
    {"P3", 2.2, 3.4, 0.5, 3.0, 2.6, 0.42},
};
const NamedPair kPerturbed{"perturbed", 2.3, 3.1, 0.5, 2.31, 3.09, 0.5 + 0.01 / kPi};
const NamedPair kDominating{"dominating", 2.3, 3.1, 0.5, 2.35, 4.0, 0.42};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
int review = 0;

void report(int id, const char* title, const Outcome& o, bool qualitative = false) {
  const char* verdict = o.pass ? "PASS" : (qualitative ? "FAIL (qualitative gate, review)" : "FAIL");
  std::printf("[%s] %2d %s: %s\n", verdict, id, title, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) (qualitative ? review : failures)++;
}

Outcome guarded(const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SpectrumOptions spectrum_opts(int n_max = kNMax) {
  SpectrumOptions o;
  o.n_max = n_max;
  return o;
}

CorrelationOptions correlation_opts() {
  CorrelationOptions o;
  o.count.epsilon = 1.0;
  o.count.grid_points = 48;
  return o;
}

SpectrumTable pair_table(const NamedPair& p) {
  const auto f = LengthFunctional::alpha(1, 2);
  return compute_spectrum({{schottky_pair(p.la1, p.lb1, p.angle1 * kPi), f},
                           {schottky_pair(p.la2, p.lb2, p.angle2 * kPi), f}},
                          spectrum_opts());
}

Letters random_cyclic_word(std::mt19937_64& rng, int length) {
  std::uniform_int_distribution<int> code(0, 3);
  for (;;) {
    Letters w;
    while (static_cast<int>(w.size()) < length) {
      const Letter l = Letter::from_code(code(rng));
      if (!w.empty() && w.back() == l.inverse()) continue;
      w.push_back(l);
    }
    if (length == 1 || w.front() != w.back().inverse()) return w;
  }
}

Outcome enumeration() {
  std::string detail;
  bool ok = true;
  for (int rank : {2, 3}) {
    std::map<int, ClassCount> seen;
    for_each_class(EnumerationOptions{rank, 12, true, 100'000'000}, [&](const ClassView& c) {
      auto& s = seen[static_cast<int>(c.letters.size())];
      ++s.classes;
      s.words += static_cast<std::uint64_t>(c.period);
      if (c.primitive()) ++s.primitive;
    });
    std::uint64_t total = 0;
    for (int n = 1; n <= 12; ++n) {
      const ClassCount o = class_count(rank, n);
      ok = ok && seen[n].words == o.words && seen[n].classes == o.classes && seen[n].primitive == o.primitive;
      total += seen[n].classes;
    }
    detail += fmt("rank %d: %llu classes n<=12; ", rank, static_cast<unsigned long long>(total));
  }
  return {ok, detail + (ok ? "all lengths exact" : "MISMATCH")};
}

Outcome eigen_identities() {
  std::mt19937_64 rng(1);
  const std::vector<Representation> reps{schottky_pair(2.3, 3.1, kPi / 2),
                                         sym_power_embed(schottky_pair(2.2, 3.4, kPi / 2), 3)};
  double homog = 0, inverse = 0, rotation = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Letters w = random_cyclic_word(rng, 1 + static_cast<int>(rng() % 10));
    const auto& rep = reps[trial % reps.size()];
    const auto lam = jordan_projection(rep, w).entries();
    for (int k = 2; k <= 5; ++k) {
      Letters wk;
      for (int i = 0; i < k; ++i) wk.insert(wk.end(), w.begin(), w.end());
      homog = std::max(homog, (jordan_projection(rep, wk).entries() - k * lam).cwiseAbs().maxCoeff() / k);
    }
    Letters inv(w.rbegin(), w.rend());
    for (auto& l : inv) l = l.inverse();
    inverse = std::max(inverse, (jordan_projection(rep, inv).entries() + lam.reverse()).cwiseAbs().maxCoeff());
    const std::size_t r = rng() % w.size();
    Letters rot(w.begin() + static_cast<std::ptrdiff_t>(r), w.end());
    rot.insert(rot.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(r));
    rotation = std::max(rotation, (jordan_projection(rep, rot).entries() - lam).cwiseAbs().maxCoeff());
  }
  const bool ok = homog <= 1e-8 && inverse <= 1e-8 && rotation <= 1e-8;
  return {ok, fmt("1000 classes; max dev power %.2e, inverse %.2e, rotation %.2e (tol 1e-8)", homog, inverse,
                  rotation)};
}

Outcome contragredient_invariance() {
  const auto rho = sym_power_embed(schottky_pair(2.3, 3.1, kPi / 2), 3);
  const auto h = LengthFunctional::hilbert(3);
  const auto t = compute_spectrum({{rho, h}, {contragredient(rho), h}}, spectrum_opts(8));
  double dev = 0;
  for (std::size_t i = 0; i < t.rows(); ++i) dev = std::max(dev, std::abs(t.column(0)[i] - t.column(1)[i]));
  return {dev <= 1e-8, fmt("%zu classes n<=8, max |l_H(rho) - l_H(rho*)| = %.2e", t.rows(), dev)};
}

Outcome fuchsian_locus() {
  const auto rho2 = schottky_pair(2.2, 3.4, kPi / 2);
  const auto t = compute_spectrum({{rho2, LengthFunctional::alpha(1, 2)},
                                   {sym_power_embed(rho2, 3), LengthFunctional::hilbert(3)}},
                                  spectrum_opts(10));
  double dev = 0;
  for (std::size_t i = 0; i < t.rows(); ++i) dev = std::max(dev, std::abs(t.column(0)[i] - t.column(1)[i]));
  return {dev <= 1e-8, fmt("%zu classes n<=10, max |l_H(sym3) - alpha1| = %.2e", t.rows(), dev)};
}

Outcome growth_oracles(const SpectrumTable& p1) {
  const auto words = counting(word_length_spectrum(2, kNMax, true), 0);
  const GrowthEstimate e = growth_rate(words);
  const double log3_err = std::abs(e.value - std::log(3.0));

  const auto c = counting(p1, 0);
  const double h = growth_rate(c).value;
  double shift = 0;
  for (double b : {0.1, 0.3, 0.7}) {
    std::vector<double> lw;
    for (double x : c.values()) lw.push_back(-b * x);
    shift = std::max(shift, std::abs(growth_rate(c.values(), lw, c.complete_below()).value - (h - b)));
  }
  double scaling = 0;
  for (double kappa : {0.5, 2.0}) {
    std::vector<double> v;
    for (double x : c.values()) v.push_back(kappa * x);
    scaling = std::max(scaling, std::abs(growth_rate(CountingFunction(v, kappa * c.complete_below())).value - h / kappa));
  }
  const bool ok = log3_err <= 0.02 && shift <= 0.01 && scaling <= 0.01;
  return {ok, fmt("word length: %.4f vs log 3 (err %.4f, bisection %.4f); shift err %.4f; scaling err %.4f", e.value,
                  log3_err, e.bisection, shift, scaling)};
}

struct PairRun {
  const NamedPair* pair;
  CorrelationReport report;
  std::string error;
  SpectrumTable table;
};

Outcome endpoints(const std::vector<PairRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const auto& r : runs) {
    if (!r.error.empty()) return {false, std::string(r.pair->name) + ": " + r.error};
    const auto& c = r.report.curve;
    const double e1 = std::abs(c.a_at_zero - c.h1.value);
    const double e2 = std::abs(c.root_b - c.h2.value);
    ok = ok && e1 <= 0.02 && e2 <= 0.02 && c.convexity_certificate <= 5e-3;
    detail += fmt("%s |a(0)-h1| %.4f, |root-h2| %.4f, convexity %.1e; ", r.pair->name, e1, e2,
                  c.convexity_certificate);
  }
  return {ok, detail};
}

Outcome j_inequality(const std::vector<PairRun>& runs, const SpectrumTable& perturbed) {
  bool ok = true;
  std::string detail;
  for (const auto& r : runs) {
    if (!r.error.empty()) return {false, std::string(r.pair->name) + ": " + r.error};
    const auto& p = r.report.intersections;
    ok = ok && p.J_12 >= 0.98 && p.J_21 >= 0.98;
    detail += fmt("%s J %.4f/%.4f; ", r.pair->name, p.J_12, p.J_21);
  }
  // the perturbed curve is nearly a line, so only the intersections are asked for
  const auto curve = sample_curve(perturbed, 0, 1, correlation_opts().curve);
  const auto p = pressure_intersections(curve);
  const bool near = p.J_12 >= 0.97 && p.J_12 <= 1.03 && p.J_21 >= 0.97 && p.J_21 <= 1.03;
  ok = ok && near;
  detail += fmt("perturbed J %.4f/%.4f", p.J_12, p.J_21);
  return {ok, detail};
}

Outcome cross_method(const std::vector<PairRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const auto& r : runs) {
    if (!r.error.empty()) return {false, std::string(r.pair->name) + ": " + r.error};
    const auto& x = r.report;
    const bool unit = x.tangent.M > 0 && x.tangent.M < 1 && x.mins.M > 0 && x.mins.M < 1;
    ok = ok && std::abs(x.tangent.M - x.mins.M) <= 0.02 && x.point_on_curve_residual <= 0.02 && unit;
    detail += fmt("%s M_t %.4f M_m %.4f (s0 %.3f) poc %.4f; ", r.pair->name, x.tangent.M, x.mins.M, x.mins.s0,
                  x.point_on_curve_residual);
  }
  return {ok, detail};
}

Outcome count_fit(const std::vector<PairRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const auto& r : runs) {
    if (!r.error.empty()) return {false, std::string(r.pair->name) + ": " + r.error};
    const auto& x = r.report;
    const auto l1 = r.table.column(0), l2 = r.table.column(1);
    const double h1 = x.curve.h1.value, h2 = x.curve.h2.value;
    bool exact = true;
    for (std::size_t k = 0; k < x.count.x.size(); ++k) {
      const double lo = x.count.x[k];
      std::size_t brute = 0;
      for (std::size_t i = 0; i < l1.size(); ++i) {
        const double u = h1 * l1[i], v = h2 * l2[i];
        brute += u > lo && u < lo + h1 * x.count.epsilon && v > lo && v < lo + h2 * x.count.epsilon;
      }
      exact = exact && brute == x.count.counts[k];
    }
    ok = ok && exact && std::abs(x.count.M - x.tangent.M) <= 0.1;
    detail += fmt("%s M_c %.4f (|dM| %.4f, rms %.3f, C/eps^2 %.3g, recount %s); ", r.pair->name, x.count.M,
                  std::abs(x.count.M - x.tangent.M), x.count.residual_rms, x.count.C_over_eps2,
                  exact ? "exact" : "MISMATCH");
  }
  return {ok, detail};
}

Outcome raw_vanishing(const SpectrumTable& t) {
  const auto opts = correlation_opts();
  const double h1 = entropy(t, 0, opts.curve.window).value;
  const double h2 = entropy(t, 1, opts.curve.window).value;
  const RawWindowReport r = raw_window_vanishing(t, 0, 1, h1, h2, 0.2);
  const double ratio = r.entropy_ratio;
  const bool outside = ratio < 0.95 || ratio > 1.05;
  std::size_t beyond = 0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    if (r.x[i] > r.threshold) beyond += r.counts[i];
  }
  return {outside && r.vanishes && beyond == 0,
          fmt("entropy ratio %.3f; windows empty beyond %.3f, data limit %.3f", ratio, r.threshold, r.data_limit)};
}

Outcome pinching() {
  PinchingOptions o;
  o.epsilons = {1.0, 0.5, 0.25};
  o.K = 6.0;
  o.angle = kPi / 2;
  o.spectrum = spectrum_opts();
  o.correlation = correlation_opts();
  const auto steps = pinching_demo(o);
  bool ok = true;
  std::string detail = "K 6: ";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (!s.error.empty()) {
      ok = false;
      detail += fmt("eps %.2f %s; ", s.epsilon, s.error.c_str());
      continue;
    }
    detail += fmt("eps %.2f M %.4f systole %.3f; ", s.epsilon, s.report.tangent.M, s.sum_systole);
    if (i > 0 && steps[i - 1].error.empty()) {
      ok = ok && s.report.tangent.M < steps[i - 1].report.tangent.M && s.sum_systole > steps[i - 1].sum_systole;
    }
  }
  return {ok, detail};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

Outcome determinism() {
  const auto& p = kPairs[0];
  auto rep = [](const char* label, double la, double lb, double angle) {
    return nlohmann::json{{"type", "schottky"}, {"la", la}, {"lb", lb}, {"angle", angle * kPi}, {"label", label}};
  };
  nlohmann::json doc = {{"n_max", kNMax},
                        {"representations", {rep("rho1", p.la1, p.lb1, p.angle1), rep("rho2", p.la2, p.lb2, p.angle2)}},
                        {"epsilon", 1.0},
                        {"x_grid", {{"points", 48}}}};
  RunConfig c = parse_config(doc);
  const fs::path base = fs::temp_directory_path() / "corrnum_acceptance_determinism";
  fs::remove_all(base);
  std::ostringstream sink;
  c.threads = 1;
  c.out = base / "t1";
  cmd_correlate(c, sink);
  c.threads = 8;
  c.out = base / "t8";
  cmd_correlate(c, sink);
  const auto a = read_dir(base / "t1");
  const auto b = read_dir(base / "t8");
  fs::remove_all(base);
  return {a == b && !a.empty(), fmt("%zu files compared, %s", a.size(), a == b ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  std::printf("acceptance: rank 2, n_max %d\n", kNMax);

  report(1, "enumeration exactness", guarded(enumeration));
  report(2, "eigenvalue identities", guarded(eigen_identities));
  report(3, "contragredient invariance", guarded(contragredient_invariance));
  report(4, "Fuchsian-locus identity", guarded(fuchsian_locus));

  std::vector<PairRun> runs;
  for (const auto& p : kPairs) {
    PairRun r{&p, {}, {}, {}};
    try {
      r.table = pair_table(p);
      r.report = correlate(r.table, 0, 1, correlation_opts());
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    runs.push_back(std::move(r));
  }
  report(5, "growth-engine oracles", guarded([&] { return growth_oracles(runs[0].table); }));
  report(6, "Manhattan endpoints and convexity", guarded([&] { return endpoints(runs); }));
  report(7, "J-inequality", guarded([&] { return j_inequality(runs, pair_table(kPerturbed)); }));
  report(8, "correlation cross-method", guarded([&] { return cross_method(runs); }));
  report(9, "counting-fit consistency", guarded([&] { return count_fit(runs); }));
  report(10, "un-renormalised vanishing", guarded([&] { return raw_vanishing(pair_table(kDominating)); }));
  report(11, "pinching demonstration", guarded(pinching), true);
  report(12, "determinism", guarded(determinism));

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d hard failure(s), %d qualitative gate(s) for review, %.1f s\n", failures, review, secs);
  return failures == 0 ? 0 : 1;
}
