#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "corrnum/freegroup.hpp"
#include "corrnum/representation.hpp"

namespace corrnum {

struct SpectrumColumn {
  std::string representation;  // representation label
  std::string functional;      // functional descriptor
  std::string name() const { return representation + ":" + functional; }
};

// Joint length spectrum over every enumerated class, one column per
// (representation, functional) pair. Rows are sorted by (word length,
// canonical word).
class SpectrumTable {
 public:
  SpectrumTable() = default;
  SpectrumTable(int rank, int n_max, bool include_powers, std::vector<SpectrumColumn> columns);

  int rank() const { return rank_; }
  int n_max() const { return n_max_; }
  bool include_powers() const { return include_powers_; }
  std::size_t rows() const { return words_.size(); }
  std::size_t num_columns() const { return columns_.size(); }
  const std::vector<SpectrumColumn>& columns() const { return columns_; }
  std::size_t column_index(const std::string& name) const;

  const std::string& word(std::size_t row) const { return words_[row]; }
  int word_length(std::size_t row) const { return word_lengths_[row]; }
  bool primitive(std::size_t row) const { return primitive_[row] != 0; }
  std::span<const double> column(std::size_t j) const { return lengths_.at(j); }
  std::span<const int> word_lengths() const { return word_lengths_; }

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  void append_row(std::string word, bool primitive, std::span<const double> lengths);
  // Adds a derived column (used by synthetic and test tables).
  void add_column(SpectrumColumn column, std::vector<double> values);
  // Sorts rows by (word length, canonical word in letter order).
  void sort_rows();

 private:
  int rank_ = 2;
  int n_max_ = 0;
  bool include_powers_ = true;
  std::vector<SpectrumColumn> columns_;
  std::vector<std::string> words_;
  std::vector<int> word_lengths_;
  std::vector<std::uint8_t> primitive_;
  std::vector<std::vector<double>> lengths_;
  nlohmann::json meta_ = nlohmann::json::object();
};

struct SpectrumRequest {
  Representation representation;
  LengthFunctional functional;
};

struct SpectrumOptions {
  int rank = 2;
  int n_max = 10;
  bool include_powers = true;
  int threads = 1;
  bool force = false;  // compute even when pilot validation fails
  int pilot_length = 6;
  int shard_prefix = 3;
  std::uint64_t max_classes = 50'000'000;
};

SpectrumTable compute_spectrum(const std::vector<SpectrumRequest>& requests, const SpectrumOptions& opts);

// Synthetic table whose single column is the word length of each class.
SpectrumTable word_length_spectrum(int rank, int n_max, bool include_powers);

// Sorted values of one column or of a linear combination of columns.
class CountingFunction {
 public:
  CountingFunction() = default;
  explicit CountingFunction(std::vector<double> values,
                            double complete_below = std::numeric_limits<double>::infinity());

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  // Every class with value below this bound is present in the table.
  double complete_below() const { return complete_below_; }
  // N(T) = #{values <= T}
  std::size_t operator()(double t) const;

 private:
  std::vector<double> values_;
  double complete_below_ = std::numeric_limits<double>::infinity();
};

// Per-row linear combination sum_j weights[j] * column_j; throws
// NonPositiveMix if any combined value is <= 0.
std::vector<double> combine_columns(const SpectrumTable& table, std::span<const double> weights);
CountingFunction counting(const SpectrumTable& table, std::size_t column);
CountingFunction counting(const SpectrumTable& table, std::span<const double> weights);

// Completeness bound for a per-row value: the smaller of the minimum over
// classes of maximal word length and (n_max + 1) times the smallest
// per-letter value among classes of word length >= n_max / 2.
double completeness_bound(const SpectrumTable& table, std::span<const double> values);

double systole(const CountingFunction& counting);

// CSV of record plus sibling JSON metadata (same basename, .json).
void save_spectrum(const SpectrumTable& table, const std::filesystem::path& csv_path);
SpectrumTable load_spectrum(const std::filesystem::path& csv_path);
std::string spectrum_csv(const SpectrumTable& table);
SpectrumTable parse_spectrum_csv(const std::string& text);

// Letter-order comparison of canonical word strings.
bool word_less(const std::string& a, const std::string& b);

std::string format_double(double x);  // 17 significant digits

}  // namespace corrnum
