#include "corrnum/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "corrnum/freegroup.hpp"
#include "corrnum/growth.hpp"
#include "corrnum/manhattan.hpp"
#include "corrnum/representation_io.hpp"

namespace corrnum {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::IoError, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Manifest::Manifest(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir_.string() + ": " + ec.message());
  const fs::path path = dir_ / "manifest.json";
  if (!fs::exists(path)) return;
  try {
    const json doc = json::parse(read_file(path));
    for (const auto& [name, hash] : doc.at("files").items()) files_[name] = hash.get<std::string>();
  } catch (const json::exception&) {
    // unreadable manifest: rebuilt from this run's outputs
  }
}

void Manifest::write(const std::string& name, const std::string& bytes) {
  const fs::path path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << bytes;
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
  files_[name] = sha256_hex(bytes);
}

void Manifest::record(const std::string& name) { files_[name] = sha256_hex(read_file(dir_ / name)); }

void Manifest::save() const {
  json doc = {{"version", kVersion}, {"algorithm", "sha256"}, {"files", json::object()}};
  for (const auto& [name, hash] : files_) {
    // drop entries whose file has since been removed
    if (fs::exists(dir_ / name)) doc["files"][name] = hash;
  }
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write manifest in " + dir_.string());
  out << doc.dump(2) << "\n";
}

namespace {

json requests_json(const std::vector<SpectrumRequest>& requests) {
  json out = json::array();
  for (const auto& r : requests) {
    out.push_back({{"representation", representation_to_json(r.representation)},
                   {"functional", r.functional.descriptor()}});
  }
  return out;
}

std::pair<std::size_t, std::size_t> pair_columns(const RunConfig& config, const SpectrumTable& table) {
  if (config.pair.first.empty() && config.pair.second.empty()) {
    if (table.num_columns() < 2) throw Error(Errc::ConfigError, "a pair needs at least two columns");
    return {0, 1};
  }
  try {
    return {table.column_index(config.pair.first), table.column_index(config.pair.second)};
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
}

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

json run_header(const RunConfig& config, const std::string& command) {
  return {{"version", kVersion}, {"command", command}, {"config_hash", sha256_hex(config.canonical().dump())}};
}

}  // namespace

int cmd_enumerate(const RunConfig& config, std::ostream& log) {
  Manifest manifest(config.out);
  json rows = json::array();
  bool ok = true;
  for (int n = 1; n <= config.n_max; ++n) {
    ClassCount seen;
    // every class of length exactly n, powers included
    EnumerationOptions opts{config.rank, n, true};
    for_each_class(opts, [&](const ClassView& c) {
      if (static_cast<int>(c.letters.size()) != n) return;
      ++seen.classes;
      seen.words += static_cast<std::uint64_t>(c.period);
      if (c.primitive()) ++seen.primitive;
    });
    const ClassCount oracle = class_count(config.rank, n);
    const bool match =
        seen.words == oracle.words && seen.classes == oracle.classes && seen.primitive == oracle.primitive;
    ok = ok && match;
    log << "n=" << n << ": " << seen.words << " words, " << seen.classes << " classes (" << seen.primitive
        << " primitive)" << (match ? "" : "  MISMATCH: oracle " + std::to_string(oracle.words) + " words, " +
                                              std::to_string(oracle.classes) + " classes, " +
                                              std::to_string(oracle.primitive) + " primitive")
        << "\n";
    rows.push_back({{"n", n},
                    {"words", seen.words},
                    {"classes", seen.classes},
                    {"primitive", seen.primitive},
                    {"oracle", {{"words", oracle.words}, {"classes", oracle.classes}, {"primitive", oracle.primitive}}},
                    {"match", match}});
  }
  json doc = run_header(config, "enumerate");
  doc["rank"] = config.rank;
  doc["lengths"] = rows;
  doc["match"] = ok;
  manifest.write_json("enumerate.json", doc);
  manifest.save();
  if (!ok) throw Error(Errc::CheckFailed, "enumeration disagrees with the trace/necklace oracle");
  return 0;
}

std::string spectrum_parameter_hash(const RunConfig& config) {
  const json doc = {{"version", kVersion},
                    {"rank", config.rank},
                    {"n_max", config.n_max},
                    {"include_powers", config.include_powers},
                    {"pilot_length", config.pilot_length},
                    {"force", config.force},
                    {"seed", config.seed},
                    {"spot_checks", config.spot_checks},
                    {"requests", requests_json(build_requests(config))}};
  return sha256_hex(doc.dump());
}

json spot_check(const SpectrumTable& table, const std::vector<SpectrumRequest>& requests, int samples,
                std::uint64_t seed) {
  json out = {{"seed", seed}, {"samples", 0}};
  if (table.rows() == 0 || samples <= 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, table.rows() - 1);
  std::vector<std::size_t> rows(static_cast<std::size_t>(samples));
  for (auto& r : rows) r = pick(rng);

  double power_dev = 0, inverse_dev = 0, recompute_dev = 0;
  for (const auto& req : requests) {
    const std::string name = req.representation.label() + ":" + req.functional.descriptor();
    std::size_t col = table.num_columns();
    for (std::size_t j = 0; j < table.num_columns(); ++j) {
      if (table.columns()[j].name() == name) col = j;
    }
    if (col == table.num_columns()) continue;
    for (std::size_t row : rows) {
      const Letters g = parse_letters(table.word(row));
      const auto lam = jordan_projection(req.representation, std::span<const Letter>(g));
      const double ell = req.functional(lam);
      const double scale = std::max(1.0, std::abs(ell));
      recompute_dev = std::max(recompute_dev, std::abs(ell - table.column(col)[row]) / scale);
      for (int k = 2; k <= 3; ++k) {
        Letters gk;
        for (int i = 0; i < k; ++i) gk.insert(gk.end(), g.begin(), g.end());
        const auto lam_k = jordan_projection(req.representation, std::span<const Letter>(gk));
        power_dev = std::max(power_dev, (lam_k.entries() - k * lam.entries()).cwiseAbs().maxCoeff() / (k * scale));
      }
      Letters inv(g.rbegin(), g.rend());
      for (auto& l : inv) l = l.inverse();
      const auto lam_inv = jordan_projection(req.representation, std::span<const Letter>(inv));
      inverse_dev =
          std::max(inverse_dev, (lam_inv.entries() + lam.entries().reverse()).cwiseAbs().maxCoeff() / scale);
    }
  }
  out["samples"] = samples;
  out["power_deviation"] = power_dev;
  out["inverse_deviation"] = inverse_dev;
  out["recompute_deviation"] = recompute_dev;
  out["tolerance"] = 1e-8;
  out["pass"] = power_dev <= 1e-8 && inverse_dev <= 1e-8 && recompute_dev <= 1e-8;
  return out;
}

SpectrumTable obtain_spectrum(const RunConfig& config, Manifest& manifest, std::ostream& log) {
  const std::string hash = spectrum_parameter_hash(config);
  const fs::path csv = manifest.dir() / "spectrum.csv";
  const fs::path meta = manifest.dir() / "spectrum.json";
  if (fs::exists(csv) && fs::exists(meta)) {
    std::string cached;
    try {
      cached = json::parse(read_file(meta)).value("parameter_hash", "");
    } catch (const json::exception&) {
    }
    if (cached == hash) {
      log << "cache hit: " << csv.string() << "\n";
      SpectrumTable table = load_spectrum(csv);
      manifest.record("spectrum.csv");
      manifest.record("spectrum.json");
      return table;
    }
  }
  const auto requests = build_requests(config);
  SpectrumTable table = compute_spectrum(requests, spectrum_options(config));
  json checks = spot_check(table, requests, config.spot_checks, config.seed);
  table.meta()["spot_checks"] = checks;
  table.meta()["parameter_hash"] = hash;
  table.meta()["version"] = kVersion;
  if (!checks.value("pass", true)) {
    throw Error(Errc::CheckFailed, "spot checks failed: power deviation " + fmt(checks["power_deviation"]) +
                                       ", inverse deviation " + fmt(checks["inverse_deviation"]));
  }
  manifest.write("spectrum.csv", spectrum_csv(table));
  manifest.write_json("spectrum.json", table.meta());
  log << "computed " << table.rows() << " classes x " << table.num_columns() << " columns";
  const auto dropped = table.meta().value("dropped", 0);
  if (dropped > 0) log << " (" << dropped << " non-loxodromic dropped)";
  log << "\n";
  return table;
}

int cmd_spectrum(const RunConfig& config, std::ostream& log) {
  Manifest manifest(config.out);
  const SpectrumTable table = obtain_spectrum(config, manifest, log);
  for (std::size_t j = 0; j < table.num_columns(); ++j) {
    const CountingFunction n = counting(table, j);
    log << table.columns()[j].name() << ": systole " << fmt(systole(n)) << ", complete below "
        << fmt(n.complete_below()) << "\n";
  }
  manifest.save();
  return 0;
}

int cmd_entropy(const RunConfig& config, std::ostream& log) {
  Manifest manifest(config.out);
  const SpectrumTable table = obtain_spectrum(config, manifest, log);
  json doc = run_header(config, "entropy");
  doc["columns"] = json::array();
  for (std::size_t j = 0; j < table.num_columns(); ++j) {
    const GrowthEstimate h = entropy(table, j, window_policy(config));
    log << table.columns()[j].name() << ": h = " << fmt(h.value) << " +- " << fmt(h.stderr_, 2)
        << " (bisection " << fmt(h.bisection) << (h.consistent ? "" : ", INCONSISTENT") << ")\n";
    json entry = h.to_json();
    entry["column"] = table.columns()[j].name();
    doc["columns"].push_back(entry);
  }
  manifest.write_json("entropy.json", doc);
  manifest.save();
  return 0;
}

int cmd_manhattan(const RunConfig& config, std::ostream& log) {
  Manifest manifest(config.out);
  const SpectrumTable table = obtain_spectrum(config, manifest, log);
  const auto [c1, c2] = pair_columns(config, table);
  const ManhattanCurve curve = sample_curve(table, c1, c2, correlation_options(config).curve);
  json doc = run_header(config, "manhattan");
  doc["curve"] = curve.to_json();
  const PressureIntersections pi = pressure_intersections(curve);
  doc["intersections"] = {{"I_12", pi.I_12}, {"I_21", pi.I_21}, {"J_12", pi.J_12}, {"J_21", pi.J_21}};
  manifest.write("curve.csv", curve.to_csv());
  manifest.write_json("curve.json", doc);
  log << "h1 = " << fmt(curve.h1.value) << ", h2 = " << fmt(curve.h2.value) << ", a(0) = " << fmt(curve.a_at_zero)
      << ", root " << fmt(curve.root_b) << ", convexity " << fmt(curve.convexity_certificate, 3) << "\n";
  log << "J_12 = " << fmt(pi.J_12) << ", J_21 = " << fmt(pi.J_21) << "\n";
  manifest.save();
  return 0;
}

namespace {

std::string plot_curve_csv(const CorrelationReport& r) {
  std::ostringstream out;
  out << "kind,b,a\n";
  for (const auto& s : r.curve.samples) out << "sample," << format_double(s.b) << "," << format_double(s.a) << "\n";
  out << "endpoint," << format_double(0.0) << "," << format_double(r.curve.h1.value) << "\n";
  out << "endpoint," << format_double(r.curve.h2.value) << "," << format_double(0.0) << "\n";
  out << "tangent," << format_double(r.tangent.b) << "," << format_double(r.tangent.a) << "\n";
  const double pb = (1 - r.mins.s0) * r.curve.h2.value * r.mins.M;
  const double pa = r.mins.s0 * r.curve.h1.value * r.mins.M;
  out << "mins," << format_double(pb) << "," << format_double(pa) << "\n";
  return out.str();
}

std::string plot_countfit_csv(const CountFit& fit) {
  std::ostringstream out;
  out << "x,count,log_count_x32,fit\n";
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    const double x = fit.x[i];
    out << format_double(x) << "," << fit.counts[i] << ",";
    if (fit.counts[i] > 0) out << format_double(std::log(static_cast<double>(fit.counts[i]) * std::pow(x, 1.5)));
    out << "," << format_double(std::log(fit.C) + fit.M * x) << "\n";
  }
  return out.str();
}

std::string raw_windows_csv(const RawWindowReport& r) {
  std::ostringstream out;
  out << "x,count\n";
  for (std::size_t i = 0; i < r.x.size(); ++i) out << format_double(r.x[i]) << "," << r.counts[i] << "\n";
  return out.str();
}

}  // namespace

int cmd_correlate(const RunConfig& config, std::ostream& log) {
  Manifest manifest(config.out);
  const SpectrumTable table = obtain_spectrum(config, manifest, log);
  const auto [c1, c2] = pair_columns(config, table);
  const CorrelationReport r = correlate(table, c1, c2, correlation_options(config));

  json ent = run_header(config, "correlate");
  ent["columns"] = {r.curve.h1.to_json(), r.curve.h2.to_json()};
  ent["columns"][0]["column"] = table.columns()[c1].name();
  ent["columns"][1]["column"] = table.columns()[c2].name();
  manifest.write_json("entropy.json", ent);
  manifest.write("curve.csv", r.curve.to_csv());

  const RawWindowReport raw =
      raw_window_vanishing(table, c1, c2, r.curve.h1.value, r.curve.h2.value, config.raw_epsilon);
  json doc = run_header(config, "correlate");
  doc["report"] = r.to_json();
  doc["raw_windows"] = {{"epsilon", raw.epsilon},
                        {"threshold", raw.threshold},
                        {"data_limit", raw.data_limit},
                        {"vanishes", raw.vanishes},
                        {"entropy_ratio", raw.entropy_ratio}};
  manifest.write_json("correlation.json", doc);
  manifest.write("plot_curve.csv", plot_curve_csv(r));
  manifest.write("plot_countfit.csv", plot_countfit_csv(r.count));
  manifest.write("raw_windows.csv", raw_windows_csv(raw));
  manifest.save();

  log << r.label1 << " vs " << r.label2 << "\n";
  log << "  h1 = " << fmt(r.curve.h1.value) << ", h2 = " << fmt(r.curve.h2.value) << "\n";
  log << "  J_12 = " << fmt(r.intersections.J_12) << ", J_21 = " << fmt(r.intersections.J_21) << "\n";
  log << "  M tangent = " << fmt(r.tangent.M) << ", mins = " << fmt(r.mins.M) << " (s0 " << fmt(r.mins.s0, 3)
      << "), count fit = " << fmt(r.count.M) << "\n";
  log << "  tangent/mins " << (r.tangent_mins_consistent ? "consistent" : "INCONSISTENT") << ", count fit "
      << (r.countfit_consistent ? "consistent" : "INCONSISTENT") << ", raw windows vanish beyond "
      << fmt(raw.threshold) << (raw.vanishes ? "" : " (not within data range)") << "\n";
  return 0;
}

int cmd_demo(const RunConfig& config, std::ostream& log) {
  Manifest manifest(config.out);
  PinchingOptions opts;
  opts.epsilons = config.demo_epsilons;
  opts.K = config.demo_K;
  opts.angle = config.demo_angle;
  opts.spectrum = spectrum_options(config);
  opts.correlation = correlation_options(config);
  const auto steps = pinching_demo(opts);

  json doc = run_header(config, "demo");
  doc["K"] = opts.K;
  doc["angle"] = opts.angle;
  doc["steps"] = pinching_to_json(steps);
  bool m_decreasing = true, systole_increasing = true;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!steps[i].error.empty()) {
      m_decreasing = systole_increasing = false;
      continue;
    }
    if (i > 0 && steps[i - 1].error.empty()) {
      m_decreasing = m_decreasing && steps[i].report.tangent.M < steps[i - 1].report.tangent.M;
      systole_increasing = systole_increasing && steps[i].sum_systole > steps[i - 1].sum_systole;
    }
  }
  doc["M_strictly_decreasing"] = m_decreasing;
  doc["sum_systole_strictly_increasing"] = systole_increasing;

  std::ostringstream csv;
  csv << "epsilon,M_tangent,M_mins,M_countfit,sum_systole,error\n";
  for (const auto& s : steps) {
    csv << format_double(s.epsilon) << ",";
    if (s.error.empty()) {
      csv << format_double(s.report.tangent.M) << "," << format_double(s.report.mins.M) << ","
          << format_double(s.report.count.M) << "," << format_double(s.sum_systole) << ",\n";
      log << "eps " << fmt(s.epsilon) << ": M = " << fmt(s.report.tangent.M) << ", sum systole "
          << fmt(s.sum_systole) << "\n";
    } else {
      std::string msg = s.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      csv << ",,,," << msg << "\n";
      log << "eps " << fmt(s.epsilon) << ": " << s.error << "\n";
    }
  }
  manifest.write_json("pinching.json", doc);
  manifest.write("pinching.csv", csv.str());
  manifest.save();
  log << "M strictly decreasing: " << (m_decreasing ? "yes" : "no") << ", sum systole strictly increasing: "
      << (systole_increasing ? "yes" : "no") << "\n";
  return 0;
}

}  // namespace corrnum
