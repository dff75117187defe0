#include <doctest.h>

#include <map>
#include <set>

#include "corrnum/error.hpp"
#include "corrnum/freegroup.hpp"
#include "generators.hpp"

using namespace corrnum;
using corrnum::testing::random_cyclic_word;
using corrnum::testing::random_letters;
using corrnum::testing::rotate;

namespace {

Letters L(std::string_view s) { return parse_letters(s); }

// All cyclically reduced words of length n over 2*rank letters, by brute force.
std::vector<Letters> all_cyclic_words(int rank, int n) {
  std::vector<Letters> out;
  Letters w(n);
  const int k = 2 * rank;
  std::vector<int> digits(n, 0);
  for (;;) {
    for (int i = 0; i < n; ++i) w[i] = Letter::from_code(digits[i]);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (w[i].inverse() == w[(i + 1) % n]) ok = false;
    }
    if (ok) out.push_back(w);
    int pos = n - 1;
    while (pos >= 0 && ++digits[pos] == k) digits[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

}  // namespace

TEST_CASE("reduce cancels adjacent inverse pairs") {
  CHECK(reduce(L("aA")).is_identity());
  CHECK(reduce(L("abBa")).letters() == L("aa"));
  CHECK(reduce(L("abA")).letters() == L("abA"));
  CHECK(reduce(L("abcCBA")).is_identity());
}

TEST_CASE("canonical class: rotation and cyclic reduction") {
  CHECK(canonical_class(L("ba")).letters() == L("ab"));
  CHECK(canonical_class(L("Aba")).letters() == L("b"));
  const ConjClass c = canonical_class(L("abab"));
  CHECK(c.letters() == L("abab"));
  CHECK(c.period() == 2);
  CHECK_FALSE(c.primitive());
  CHECK_THROWS_AS(canonical_class(L("aA")), Error);
}

TEST_CASE("inverse class") {
  CHECK(invert_class(canonical_class(L("a"))).letters() == L("A"));
  CHECK(invert_class(canonical_class(L("ab"))) == canonical_class(L("BA")));
}

TEST_CASE("letter order is a < A < b < B") {
  CHECK(Letter::from_char('a') < Letter::from_char('A'));
  CHECK(Letter::from_char('A') < Letter::from_char('b'));
  CHECK(Letter::from_char('b') < Letter::from_char('B'));
}

TEST_CASE("class_count matches trace and necklace values") {
  auto check = [](int rank, int n, std::uint64_t words, std::uint64_t classes) {
    const ClassCount c = class_count(rank, n);
    CHECK(c.words == words);
    CHECK(c.classes == classes);
  };
  check(2, 1, 4, 4);
  check(2, 2, 12, 8);
  check(2, 3, 28, 12);
  check(3, 2, 30, 18);
}

TEST_CASE("enumeration totals") {
  CHECK(enumerate_classes(2, 1, true).size() == 4);
  CHECK(enumerate_classes(2, 2, true).size() == 12);
  CHECK(enumerate_classes(2, 3, true).size() == 24);
}

TEST_CASE("enumeration equals brute-force orbit collection") {
  for (int rank : {2, 3}) {
    const int n_max = rank == 2 ? 7 : 5;
    std::set<Letters> brute, brute_primitive;
    for (int n = 1; n <= n_max; ++n) {
      for (const auto& w : all_cyclic_words(rank, n)) {
        const ConjClass c = canonical_class(w);
        brute.insert(c.letters());
        if (c.primitive()) brute_primitive.insert(c.letters());
      }
    }
    std::set<Letters> fast, fast_primitive;
    for (const auto& c : enumerate_classes(rank, n_max, true)) {
      CHECK(fast.insert(c.letters()).second);
      if (c.primitive()) fast_primitive.insert(c.letters());
    }
    CHECK(fast == brute);
    CHECK(enumerate_classes(rank, n_max, false).size() == brute_primitive.size());
  }
}

TEST_CASE("enumeration counts agree with class_count up to length 12") {
  for (int rank : {2, 3}) {
    const int n_max = rank == 2 ? 12 : 9;
    std::map<int, ClassCount> seen;
    for_each_class(EnumerationOptions{rank, n_max, true}, [&](const ClassView& c) {
      auto& s = seen[static_cast<int>(c.letters.size())];
      ++s.classes;
      s.words += static_cast<std::uint64_t>(c.period);
      if (c.primitive()) ++s.primitive;
    });
    for (int n = 1; n <= n_max; ++n) {
      const ClassCount oracle = class_count(rank, n);
      CAPTURE(rank);
      CAPTURE(n);
      CHECK(seen[n].words == oracle.words);
      CHECK(seen[n].classes == oracle.classes);
      CHECK(seen[n].primitive == oracle.primitive);
    }
  }
}

TEST_CASE("shards partition the class stream") {
  const EnumerationOptions opts{2, 8, true};
  std::vector<std::string> joined;
  for (const auto& shard : enumeration_shards(opts, 3)) {
    for_each_class(opts, shard, [&](const ClassView& c) { joined.push_back(to_string(c.letters)); });
  }
  std::vector<std::string> whole;
  for_each_class(opts, [&](const ClassView& c) { whole.push_back(to_string(c.letters)); });
  std::sort(joined.begin(), joined.end());
  std::sort(whole.begin(), whole.end());
  CHECK(joined == whole);
}

TEST_CASE("cutoff budget") {
  CHECK_THROWS_AS(check_enumeration_budget(EnumerationOptions{2, 30, true, 1'000'000}), Error);
  CHECK_NOTHROW(check_enumeration_budget(EnumerationOptions{2, 10, true, 1'000'000}));
}

TEST_CASE("property: canonical class is invariant under rotation and conjugation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Letters w = random_cyclic_word(rng, 2 + static_cast<int>(rng() % 2), n);
    const ConjClass c = canonical_class(w);
    CHECK(c.size() == w.size());
    CHECK(static_cast<int>(c.size()) % c.period() == 0);
    CHECK(least_rotation(c.letters()) == 0);
    CHECK(canonical_class(rotate(w, rng() % w.size())) == c);
    // conjugating by a random word leaves the class unchanged
    const Letters u = random_letters(rng, 3, 4);
    Letters conj = corrnum::testing::inverse_word(u);
    conj.insert(conj.end(), w.begin(), w.end());
    conj.insert(conj.end(), u.begin(), u.end());
    CHECK(canonical_class(conj) == c);
    CHECK(invert_class(invert_class(c)) == c);
  }
}

TEST_CASE("property: reduce is idempotent and has no adjacent cancellation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const Letters w = random_letters(rng, 2, static_cast<int>(rng() % 16));
    const ReducedWord r = reduce(w);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) CHECK(r.letters()[i + 1] != r.letters()[i].inverse());
    CHECK(reduce(r.letters()) == r);
  }
}
