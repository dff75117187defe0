#include "corrnum/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "corrnum/representation_io.hpp"

namespace corrnum {

using nlohmann::json;

namespace {

int letter_rank(char c) { return c >= 'a' ? 2 * (c - 'a') : 2 * (c - 'A') + 1; }

void check_label(const std::string& s) {
  if (s.empty() || s.find_first_of(",:\n\r\"") != std::string::npos) {
    throw Error(Errc::InvalidArgument, "column label '" + s + "' must be nonempty and free of , : \" and newlines");
  }
}

}  // namespace

bool word_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int x = letter_rank(a[i]);
    const int y = letter_rank(b[i]);
    if (x != y) return x < y;
  }
  return false;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SpectrumTable::SpectrumTable(int rank, int n_max, bool include_powers, std::vector<SpectrumColumn> columns)
    : rank_(rank), n_max_(n_max), include_powers_(include_powers), columns_(std::move(columns)) {
  for (const auto& c : columns_) {
    check_label(c.representation);
    check_label(c.functional);
  }
  lengths_.resize(columns_.size());
}

std::size_t SpectrumTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name() == name || columns_[j].representation == name) return j;
  }
  throw Error(Errc::InvalidArgument, "no column named '" + name + "'");
}

void SpectrumTable::append_row(std::string word, bool primitive, std::span<const double> lengths) {
  if (lengths.size() != columns_.size()) throw Error(Errc::InvalidArgument, "row width does not match columns");
  word_lengths_.push_back(static_cast<int>(word.size()));
  words_.push_back(std::move(word));
  primitive_.push_back(primitive ? 1 : 0);
  for (std::size_t j = 0; j < lengths.size(); ++j) lengths_[j].push_back(lengths[j]);
}

void SpectrumTable::add_column(SpectrumColumn column, std::vector<double> values) {
  check_label(column.representation);
  check_label(column.functional);
  if (values.size() != rows()) throw Error(Errc::InvalidArgument, "column length does not match row count");
  for (double v : values) {
    if (!(v > 0) || !std::isfinite(v)) throw Error(Errc::InvalidArgument, "lengths must be positive and finite");
  }
  columns_.push_back(std::move(column));
  lengths_.push_back(std::move(values));
}

void SpectrumTable::sort_rows() {
  std::vector<std::size_t> order(rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return word_less(words_[i], words_[j]); });
  auto permute = [&](auto& v) {
    std::remove_reference_t<decltype(v)> out;
    out.reserve(v.size());
    for (std::size_t i : order) out.push_back(std::move(v[i]));
    v = std::move(out);
  };
  permute(words_);
  permute(word_lengths_);
  permute(primitive_);
  for (auto& col : lengths_) permute(col);
}

namespace {

struct ShardResult {
  std::vector<std::string> words;
  std::vector<std::uint8_t> primitive;
  std::vector<double> lengths;  // row-major, width = number of columns
  std::size_t dropped = 0;
};

}  // namespace

SpectrumTable compute_spectrum(const std::vector<SpectrumRequest>& requests, const SpectrumOptions& opts) {
  if (requests.empty()) throw Error(Errc::InvalidArgument, "compute_spectrum needs at least one column");
  EnumerationOptions enum_opts{opts.rank, opts.n_max, opts.include_powers, opts.max_classes};
  check_enumeration_budget(enum_opts);

  // Distinct representations (by label) and the columns that use them.
  std::vector<const Representation*> reps;
  std::vector<std::size_t> rep_of_column;
  std::vector<SpectrumColumn> columns;
  for (const auto& req : requests) {
    if (req.representation.rank() != opts.rank) {
      throw Error(Errc::InvalidArgument, "representation '" + req.representation.label() + "' has rank " +
                                             std::to_string(req.representation.rank()) + ", table rank is " +
                                             std::to_string(opts.rank));
    }
    if (req.functional.dimension() != req.representation.dimension()) {
      throw Error(Errc::InvalidArgument, "functional " + req.functional.descriptor() + " does not match dimension of '" +
                                             req.representation.label() + "'");
    }
    std::size_t idx = reps.size();
    for (std::size_t i = 0; i < reps.size(); ++i) {
      if (reps[i]->label() == req.representation.label()) idx = i;
    }
    if (idx == reps.size()) reps.push_back(&req.representation);
    rep_of_column.push_back(idx);
    columns.push_back({req.representation.label(), req.functional.descriptor()});
  }
  for (std::size_t i = 0; i < columns.size(); ++i)
    for (std::size_t j = i + 1; j < columns.size(); ++j)
      if (columns[i].name() == columns[j].name()) throw Error(Errc::InvalidArgument, "duplicate column " + columns[i].name());

  SpectrumTable table(opts.rank, opts.n_max, opts.include_powers, columns);

  // Pilot validation on every class up to pilot_length.
  const auto pilot = enumerate_classes(opts.rank, opts.pilot_length, true);
  json verdicts = json::object();
  std::vector<std::string> failed;
  for (const Representation* rep : reps) {
    const LoxodromyReport report = validate_loxodromy(*rep, pilot);
    verdicts[rep->label()] = {{"empirically_anosov", report.empirically_anosov},
                              {"slope", report.slope},
                              {"non_loxodromic", report.non_loxodromic},
                              {"min_gap_per_letter", report.min_gap_per_letter}};
    if (!report.empirically_anosov) failed.push_back(rep->label());
  }
  if (!failed.empty() && !opts.force) {
    std::string names;
    for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
    throw Error(Errc::PilotValidationFailed,
                "representation(s) " + names + " failed the loxodromy pilot on classes of length <= " +
                    std::to_string(opts.pilot_length) + " (use force to override)");
  }

  const auto shards = enumeration_shards(enum_opts, opts.shard_prefix);
  std::vector<ShardResult> results(shards.size());
  std::atomic<std::size_t> next{0};
  const std::size_t width = columns.size();

  auto work = [&] {
    std::vector<double> row(width);
    std::vector<JordanVector<double>> lambdas;
    for (std::size_t s = next.fetch_add(1); s < shards.size(); s = next.fetch_add(1)) {
      ShardResult& out = results[s];
      for_each_class(enum_opts, shards[s], [&](const ClassView& v) {
        try {
          lambdas.clear();
          for (const Representation* rep : reps) lambdas.push_back(jordan_projection(*rep, v.letters));
          for (std::size_t j = 0; j < width; ++j) {
            const double value = requests[j].functional(lambdas[rep_of_column[j]]);
            if (!(value > 0) || !std::isfinite(value)) throw Error(Errc::NotLoxodromic, "non-positive length");
            row[j] = value;
          }
        } catch (const Error& e) {
          if (e.code() != Errc::NotLoxodromic) throw;
          ++out.dropped;
          return;
        }
        out.words.push_back(to_string(v.letters));
        out.primitive.push_back(v.primitive() ? 1 : 0);
        out.lengths.insert(out.lengths.end(), row.begin(), row.end());
      });
    }
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        try {
          work();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = shards.size();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::size_t dropped = 0;
  for (auto& r : results) {
    dropped += r.dropped;
    for (std::size_t i = 0; i < r.words.size(); ++i) {
      table.append_row(std::move(r.words[i]), r.primitive[i] != 0,
                       std::span<const double>(r.lengths.data() + i * width, width));
    }
    r = ShardResult{};
  }
  table.sort_rows();

  json reps_json = json::array();
  for (const Representation* rep : reps) reps_json.push_back(representation_to_json(*rep));
  json cols = json::array();
  for (const auto& c : columns) cols.push_back(c.name());
  table.meta() = {{"rank", opts.rank},
                  {"n_max", opts.n_max},
                  {"include_powers", opts.include_powers},
                  {"columns", cols},
                  {"rows", table.rows()},
                  {"dropped", dropped},
                  {"forced", opts.force && !failed.empty()},
                  {"pilot_length", opts.pilot_length},
                  {"loxodromy", verdicts},
                  {"representations", reps_json}};
  return table;
}

SpectrumTable word_length_spectrum(int rank, int n_max, bool include_powers) {
  SpectrumTable table(rank, n_max, include_powers, {{"wordlength", "unit"}});
  EnumerationOptions opts{rank, n_max, include_powers};
  for_each_class(opts, [&](const ClassView& v) {
    const double len = static_cast<double>(v.letters.size());
    table.append_row(to_string(v.letters), v.primitive(), std::span<const double>(&len, 1));
  });
  table.sort_rows();
  table.meta() = {{"rank", rank}, {"n_max", n_max}, {"include_powers", include_powers}, {"synthetic", "word_length"}};
  return table;
}

CountingFunction::CountingFunction(std::vector<double> values, double complete_below)
    : values_(std::move(values)), complete_below_(complete_below) {
  std::sort(values_.begin(), values_.end());
}

std::size_t CountingFunction::operator()(double t) const {
  return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), t) - values_.begin());
}

std::vector<double> combine_columns(const SpectrumTable& table, std::span<const double> weights) {
  if (weights.size() != table.num_columns()) throw Error(Errc::InvalidArgument, "mix weights must match column count");
  std::vector<double> out(table.rows(), 0.0);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] == 0) continue;
    const auto col = table.column(j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[j] * col[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0)) throw Error(Errc::NonPositiveMix, "combined length of '" + table.word(i) + "' is not positive");
  }
  return out;
}

double completeness_bound(const SpectrumTable& table, std::span<const double> values) {
  // A class of word length n_max + 1 or more is assumed to be at least as
  // long per letter as the slowest class in the upper half of the table.
  const int n = table.n_max();
  double at_cutoff = std::numeric_limits<double>::infinity();
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const int len = table.word_length(i);
    if (len == n) at_cutoff = std::min(at_cutoff, values[i]);
    if (2 * len >= n) rate = std::min(rate, values[i] / len);
  }
  return std::min(at_cutoff, rate * (n + 1));
}

CountingFunction counting(const SpectrumTable& table, std::size_t column) {
  std::vector<double> w(table.num_columns(), 0.0);
  w.at(column) = 1.0;
  return counting(table, w);
}

CountingFunction counting(const SpectrumTable& table, std::span<const double> weights) {
  std::vector<double> values = combine_columns(table, weights);
  const double bound = completeness_bound(table, values);
  return CountingFunction(std::move(values), bound);
}

double systole(const CountingFunction& counting) {
  if (counting.empty()) throw Error(Errc::EmptySpectrum, "systole of an empty spectrum");
  return counting.values().front();
}

std::string spectrum_csv(const SpectrumTable& table) {
  std::string out = "word,len,primitive";
  for (const auto& c : table.columns()) out += "," + c.name();
  out += "\n";
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out += table.word(i);
    out += ",";
    out += std::to_string(table.word_length(i));
    out += table.primitive(i) ? ",1" : ",0";
    for (std::size_t j = 0; j < table.num_columns(); ++j) {
      out += ",";
      out += format_double(table.column(j)[i]);
    }
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

SpectrumTable parse_spectrum_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "spectrum CSV is empty");
  const auto header = split(line, ',');
  if (header.size() < 4 || header[0] != "word" || header[1] != "len" || header[2] != "primitive") {
    throw Error(Errc::ParseError, "line 1: header must start with word,len,primitive and name at least one column");
  }
  std::vector<SpectrumColumn> columns;
  for (std::size_t j = 3; j < header.size(); ++j) {
    const auto colon = header[j].rfind(':');
    if (colon == std::string_view::npos) throw Error(Errc::ParseError, "line 1: column '" + std::string(header[j]) + "' lacks label:functional");
    columns.push_back({std::string(header[j].substr(0, colon)), std::string(header[j].substr(colon + 1))});
  }
  const std::size_t width = columns.size();
  std::vector<std::string> words;
  std::vector<std::uint8_t> prim;
  std::vector<double> values;
  int max_len = 0;
  int max_gen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto bad = [&](const std::string& what) {
      return Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + what);
    };
    const auto fields = split(line, ',');
    if (fields.size() != width + 3) throw bad("expected " + std::to_string(width + 3) + " fields");
    const std::string word(fields[0]);
    if (word.empty()) throw bad("empty word");
    try {
      const Letters letters = parse_letters(word);
      ConjClass::from_canonical(letters);
      for (Letter l : letters) max_gen = std::max(max_gen, l.generator());
    } catch (const Error&) {
      throw bad("'" + word + "' is not a canonical class word");
    }
    int len = 0;
    auto [p, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), len);
    if (ec != std::errc() || p != fields[1].data() + fields[1].size() || len != static_cast<int>(word.size())) {
      throw bad("word length field does not match word");
    }
    if (fields[2] != "0" && fields[2] != "1") throw bad("primitive flag must be 0 or 1");
    for (std::size_t j = 0; j < width; ++j) {
      const std::string f(fields[3 + j]);
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || *end != '\0' || !std::isfinite(v) || !(v > 0)) throw bad("length '" + f + "' is not a positive number");
      values.push_back(v);
    }
    max_len = std::max(max_len, len);
    words.push_back(word);
    prim.push_back(fields[2] == "1" ? 1 : 0);
  }
  SpectrumTable table(std::max(2, max_gen + 1), max_len, true, columns);
  for (std::size_t i = 0; i < words.size(); ++i) {
    table.append_row(std::move(words[i]), prim[i] != 0, std::span<const double>(values.data() + i * width, width));
  }
  return table;
}

void save_spectrum(const SpectrumTable& table, const std::filesystem::path& csv_path) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + csv_path.string());
    out << spectrum_csv(table);
  }
  auto meta_path = csv_path;
  meta_path.replace_extension(".json");
  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw Error(Errc::IoError, "cannot write " + meta_path.string());
  meta << table.meta().dump(2) << "\n";
}

SpectrumTable load_spectrum(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + csv_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  SpectrumTable parsed = parse_spectrum_csv(buf.str());
  auto meta_path = csv_path;
  meta_path.replace_extension(".json");
  json meta = json::object();
  if (std::filesystem::exists(meta_path)) {
    std::ifstream m(meta_path);
    try {
      meta = json::parse(m);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, meta_path.string() + ": " + e.what());
    }
  }
  const int rank = meta.value("rank", parsed.rank());
  const int n_max = meta.value("n_max", parsed.n_max());
  const bool powers = meta.value("include_powers", true);
  SpectrumTable table(rank, n_max, powers, parsed.columns());
  std::vector<double> row(parsed.num_columns());
  for (std::size_t i = 0; i < parsed.rows(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = parsed.column(j)[i];
    table.append_row(parsed.word(i), parsed.primitive(i), row);
  }
  table.meta() = std::move(meta);
  return table;
}

}  // namespace corrnum
