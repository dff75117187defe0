#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corrnum {

// A generator or its inverse. Letters are ordered by generator index first
// and sign second (+1 before -1); `code()` realizes that order as 2*gen+neg.
class Letter {
 public:
  constexpr Letter() = default;
  constexpr Letter(int generator, int sign)
      : code_(static_cast<std::uint8_t>(2 * generator + (sign < 0 ? 1 : 0))) {}

  static constexpr Letter from_code(int code) {
    Letter l;
    l.code_ = static_cast<std::uint8_t>(code);
    return l;
  }

  constexpr int generator() const { return code_ >> 1; }
  constexpr int sign() const { return (code_ & 1) ? -1 : 1; }
  constexpr int code() const { return code_; }
  constexpr Letter inverse() const { return from_code(code_ ^ 1); }

  // 'a' for the first generator, 'A' for its inverse, and so on.
  char to_char() const;
  static Letter from_char(char c);

  friend constexpr auto operator<=>(Letter, Letter) = default;

 private:
  std::uint8_t code_ = 0;
};

using Letters = std::vector<Letter>;

std::string to_string(std::span<const Letter> letters);
Letters parse_letters(std::string_view text);

// Freely reduced word. The empty word is the identity.
class ReducedWord {
 public:
  ReducedWord() = default;

  const Letters& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }

  friend bool operator==(const ReducedWord&, const ReducedWord&) = default;

 private:
  friend ReducedWord reduce(std::span<const Letter> letters);
  explicit ReducedWord(Letters letters) : letters_(std::move(letters)) {}

  Letters letters_;
};

ReducedWord reduce(std::span<const Letter> letters);

// Canonical representative of an oriented conjugacy class: the cyclically
// reduced, lexicographically least rotation.
class ConjClass {
 public:
  const Letters& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  int period() const { return period_; }
  bool primitive() const { return period_ == static_cast<int>(letters_.size()); }
  std::string to_string() const { return corrnum::to_string(letters_); }

  // Builds from letters that are already canonical; checked.
  static ConjClass from_canonical(Letters letters);

  friend bool operator==(const ConjClass& a, const ConjClass& b) { return a.letters_ == b.letters_; }
  friend auto operator<=>(const ConjClass& a, const ConjClass& b) {
    if (a.size() != b.size()) return a.size() <=> b.size();
    return a.letters_ <=> b.letters_;
  }

 private:
  ConjClass(Letters letters, int period) : letters_(std::move(letters)), period_(period) {}
  friend ConjClass canonical_class(const ReducedWord& w);

  Letters letters_;
  int period_ = 0;
};

ConjClass canonical_class(const ReducedWord& w);
ConjClass canonical_class(std::span<const Letter> letters);
ConjClass invert_class(const ConjClass& c);

// Start index of the lexicographically least rotation (Booth).
std::size_t least_rotation(std::span<const Letter> letters);
// Smallest p dividing n with letters invariant under rotation by p.
int rotation_period(std::span<const Letter> letters);

struct ClassCount {
  std::uint64_t words = 0;      // cyclically reduced words of length n
  std::uint64_t classes = 0;    // their rotation orbits
  std::uint64_t primitive = 0;  // orbits of full length
};

// words = tr(A^n) for the no-backtracking adjacency matrix A on 2*rank
// letters; classes from the Burnside count over rotations.
ClassCount class_count(int rank, int n);
std::uint64_t total_class_count(int rank, int n_max, bool include_powers);

// Lightweight handle passed to enumeration visitors. `letters` is only valid
// during the callback.
struct ClassView {
  std::span<const Letter> letters;
  int period;
  bool primitive() const { return period == static_cast<int>(letters.size()); }
  ConjClass materialize() const;
};

struct EnumerationOptions {
  int rank = 2;
  int n_max = 1;
  bool include_powers = true;
  std::uint64_t max_classes = 50'000'000;
};

// Disjoint slice of the class stream. A shard with an empty prefix covers
// every class shorter than `prefix_length`; otherwise it covers classes of
// length >= prefix_length whose canonical word starts with `prefix`.
struct EnumerationShard {
  Letters prefix;
  int prefix_length = 0;
  int lyndon_period = 0;
};

// Throws CutoffTooLarge when the projected class count exceeds the budget.
void check_enumeration_budget(const EnumerationOptions& opts);

std::vector<EnumerationShard> enumeration_shards(const EnumerationOptions& opts, int prefix_length = 3);

void for_each_class(const EnumerationOptions& opts, const EnumerationShard& shard,
                    const std::function<void(const ClassView&)>& visit);
void for_each_class(const EnumerationOptions& opts, const std::function<void(const ClassView&)>& visit);

std::vector<ConjClass> enumerate_classes(const EnumerationOptions& opts);
inline std::vector<ConjClass> enumerate_classes(int rank, int n_max, bool include_powers) {
  return enumerate_classes(EnumerationOptions{rank, n_max, include_powers});
}

}  // namespace corrnum
