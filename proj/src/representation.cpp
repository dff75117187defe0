#include "corrnum/representation.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "corrnum/numeric.hpp"

namespace corrnum {

LengthFunctional::LengthFunctional(std::vector<double> coefficients, double scale)
    : coefficients_(std::move(coefficients)), scale_(scale) {
  if (coefficients_.empty()) throw Error(Errc::InvalidArgument, "functional needs at least one coefficient");
  double total = 0;
  for (double c : coefficients_) {
    if (!(c >= 0) || !std::isfinite(c)) throw Error(Errc::InvalidArgument, "functional coefficients must be >= 0");
    total += c;
  }
  if (!(total > 0)) throw Error(Errc::InvalidArgument, "functional coefficients must not all vanish");
  if (!(scale_ > 0) || !std::isfinite(scale_)) throw Error(Errc::InvalidArgument, "functional scale must be positive");
}

LengthFunctional LengthFunctional::alpha(int index, int dimension) {
  if (dimension < 2 || index < 1 || index >= dimension) throw Error(Errc::InvalidArgument, "simple root index out of range");
  std::vector<double> c(dimension - 1, 0.0);
  c[index - 1] = 1.0;
  return LengthFunctional(std::move(c));
}

LengthFunctional LengthFunctional::hilbert(int dimension) {
  if (dimension < 2) throw Error(Errc::InvalidArgument, "dimension must be >= 2");
  return LengthFunctional(std::vector<double>(dimension - 1, 1.0), 0.5);
}

namespace {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return s;
}

}  // namespace

LengthFunctional LengthFunctional::parse(const std::string& descriptor, int dimension) {
  std::string body = descriptor;
  double scale = 1.0;
  if (const auto star = descriptor.find('*'); star != std::string::npos) {
    body = descriptor.substr(0, star);
    const std::string s = descriptor.substr(star + 1);
    char* end = nullptr;
    scale = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw Error(Errc::ParseError, "bad functional scale in '" + descriptor + "'");
  }
  LengthFunctional base = [&] {
    if (body == "hilbert") return hilbert(dimension);
    if (body.rfind("alpha", 0) == 0) {
      const std::string idx = body.substr(5);
      char* end = nullptr;
      const long i = std::strtol(idx.c_str(), &end, 10);
      if (idx.empty() || *end != '\0') throw Error(Errc::ParseError, "bad simple root in '" + descriptor + "'");
      return alpha(static_cast<int>(i), dimension);
    }
    if (body.rfind("phi[", 0) == 0 && body.back() == ']') {
      std::vector<double> c;
      std::stringstream ss(body.substr(4, body.size() - 5));
      std::string item;
      while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        c.push_back(std::strtod(item.c_str(), &end));
        if (item.empty() || *end != '\0') throw Error(Errc::ParseError, "bad coefficient in '" + descriptor + "'");
      }
      if (static_cast<int>(c.size()) != dimension - 1) {
        throw Error(Errc::InvalidArgument, "functional '" + descriptor + "' needs " + std::to_string(dimension - 1) +
                                               " coefficients");
      }
      return LengthFunctional(std::move(c));
    }
    throw Error(Errc::ParseError, "unknown functional '" + descriptor + "'");
  }();
  return LengthFunctional(base.coefficients(), base.scale() * scale);
}

std::string LengthFunctional::descriptor() const {
  const int d = dimension();
  std::string body;
  double scale = scale_;
  int nonzero = 0;
  int which = -1;
  bool all_one = true;
  for (int i = 0; i < d - 1; ++i) {
    if (coefficients_[i] != 0) {
      ++nonzero;
      which = i;
    }
    if (coefficients_[i] != 1.0) all_one = false;
  }
  if (all_one && scale == 0.5 && d >= 3) {
    return "hilbert";
  }
  if (nonzero == 1 && coefficients_[which] == 1.0) {
    body = "alpha" + std::to_string(which + 1);
  } else {
    body = "phi[";
    for (int i = 0; i < d - 1; ++i) {
      if (i) body += ",";
      body += format_number(coefficients_[i]);
    }
    body += "]";
  }
  if (scale != 1.0) body += "*" + format_number(scale);
  return body;
}

LoxodromyReport validate_loxodromy(const Representation& rep, std::span<const ConjClass> sample,
                                   const LoxodromyOptions& opts) {
  LoxodromyReport report;
  std::map<int, double> worst;  // word length -> minimal log gap
  report.min_gap_per_letter = std::numeric_limits<double>::infinity();
  for (const ConjClass& c : sample) {
    const auto profile = eigen_profile(rep, std::span<const Letter>(c.letters()));
    LoxodromyEntry e;
    e.word = c.to_string();
    e.word_length = static_cast<int>(c.size());
    e.min_relative_gap = profile.min_relative_gap;
    e.min_log_gap = std::max(0.0, profile.min_log_gap);
    e.gap_per_letter = e.min_log_gap / e.word_length;
    if (!(e.min_relative_gap > rep.eig_tolerance())) ++report.non_loxodromic;
    auto [it, inserted] = worst.emplace(e.word_length, e.min_log_gap);
    if (!inserted) it->second = std::min(it->second, e.min_log_gap);
    report.min_gap_per_letter = std::min(report.min_gap_per_letter, e.gap_per_letter);
    report.entries.push_back(std::move(e));
  }
  if (sample.empty()) report.min_gap_per_letter = 0;
  if (worst.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& [len, gap] : worst) {
      x.push_back(len);
      y.push_back(gap);
    }
    const LineFit fit = fit_line(x, y);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
  } else if (worst.size() == 1) {
    report.slope = worst.begin()->second / worst.begin()->first;
  }
  report.empirically_anosov = !sample.empty() && report.non_loxodromic == 0 && report.slope > opts.min_slope &&
                              report.min_gap_per_letter > 0;
  return report;
}

}  // namespace corrnum
