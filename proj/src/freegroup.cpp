#include "corrnum/freegroup.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <numeric>

#include "corrnum/error.hpp"

namespace corrnum {

char Letter::to_char() const {
  const char base = sign() > 0 ? 'a' : 'A';
  return static_cast<char>(base + generator());
}

Letter Letter::from_char(char c) {
  if (c >= 'a' && c <= 'z') return Letter(c - 'a', +1);
  if (c >= 'A' && c <= 'Z') return Letter(c - 'A', -1);
  throw Error(Errc::ParseError, std::string("not a letter: '") + c + "'");
}

std::string to_string(std::span<const Letter> letters) {
  std::string out;
  out.reserve(letters.size());
  for (Letter l : letters) out.push_back(l.to_char());
  return out;
}

Letters parse_letters(std::string_view text) {
  Letters out;
  out.reserve(text.size());
  for (char c : text) out.push_back(Letter::from_char(c));
  return out;
}

ReducedWord reduce(std::span<const Letter> letters) {
  Letters stack;
  stack.reserve(letters.size());
  for (Letter l : letters) {
    if (!stack.empty() && stack.back() == l.inverse()) {
      stack.pop_back();
    } else {
      stack.push_back(l);
    }
  }
  return ReducedWord(std::move(stack));
}

std::size_t least_rotation(std::span<const Letter> letters) {
  const std::size_t n = letters.size();
  if (n == 0) return 0;
  auto at = [&](std::size_t i) { return letters[i % n].code(); };
  std::vector<std::ptrdiff_t> fail(2 * n, -1);
  std::size_t k = 0;
  for (std::size_t j = 1; j < 2 * n; ++j) {
    const int sj = at(j);
    std::ptrdiff_t i = fail[j - k - 1];
    while (i != -1 && sj != at(k + i + 1)) {
      if (sj < at(k + i + 1)) k = j - i - 1;
      i = fail[i];
    }
    if (sj != at(k + i + 1)) {  // i == -1
      if (sj < at(k)) k = j;
      fail[j - k] = -1;
    } else {
      fail[j - k] = i + 1;
    }
  }
  return k % n;
}

int rotation_period(std::span<const Letter> letters) {
  const std::size_t n = letters.size();
  if (n == 0) return 0;
  std::vector<std::size_t> pi(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t k = pi[i - 1];
    while (k > 0 && letters[i] != letters[k]) k = pi[k - 1];
    if (letters[i] == letters[k]) ++k;
    pi[i] = k;
  }
  const std::size_t p = n - pi[n - 1];
  return static_cast<int>(n % p == 0 ? p : n);
}

ConjClass ConjClass::from_canonical(Letters letters) {
  ConjClass c = canonical_class(std::span<const Letter>(letters));
  if (c.letters_ != letters) {
    throw Error(Errc::InvalidArgument, "word is not a canonical class representative: " +
                                           corrnum::to_string(letters));
  }
  return c;
}

ConjClass canonical_class(const ReducedWord& w) {
  const Letters& in = w.letters();
  std::size_t lo = 0;
  std::size_t hi = in.size();
  while (hi - lo >= 2 && in[lo] == in[hi - 1].inverse()) {
    ++lo;
    --hi;
  }
  if (hi == lo) throw Error(Errc::IdentityWord, "word reduces to the identity");
  std::span<const Letter> core(in.data() + lo, hi - lo);
  const std::size_t start = least_rotation(core);
  Letters out;
  out.reserve(core.size());
  for (std::size_t i = 0; i < core.size(); ++i) out.push_back(core[(start + i) % core.size()]);
  const int period = rotation_period(out);
  return ConjClass(std::move(out), period);
}

ConjClass canonical_class(std::span<const Letter> letters) { return canonical_class(reduce(letters)); }

ConjClass invert_class(const ConjClass& c) {
  Letters inv;
  inv.reserve(c.size());
  for (auto it = c.letters().rbegin(); it != c.letters().rend(); ++it) inv.push_back(it->inverse());
  return canonical_class(std::span<const Letter>(inv));
}

ConjClass ClassView::materialize() const {
  return canonical_class(letters);
}

namespace {

void check_rank(int rank) {
  if (rank < 2 || rank > 26) throw Error(Errc::InvalidArgument, "rank must lie in [2, 26]");
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(Errc::CutoffTooLarge, "class count overflows 64 bits");
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw Error(Errc::CutoffTooLarge, "class count overflows 64 bits");
  return r;
}

using CountMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

CountMatrix multiply(const CountMatrix& a, const CountMatrix& b) {
  CountMatrix c = CountMatrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (Eigen::Index j = 0; j < b.cols(); ++j) c(i, j) = checked_add(c(i, j), checked_mul(a(i, k), b(k, j)));
    }
  return c;
}

// tr(A^d) for every d dividing n is needed; compute powers incrementally.
std::vector<std::uint64_t> trace_powers(int rank, int n) {
  const int m = 2 * rank;
  CountMatrix adj = CountMatrix::Ones(m, m);
  for (int x = 0; x < m; ++x) adj(x, x ^ 1) = 0;
  std::vector<std::uint64_t> traces(n + 1, 0);
  CountMatrix power = adj;
  for (int k = 1; k <= n; ++k) {
    if (k > 1) power = multiply(power, adj);
    std::uint64_t tr = 0;
    for (int i = 0; i < m; ++i) tr = checked_add(tr, power(i, i));
    traces[k] = tr;
  }
  return traces;
}

int euler_phi(int n) {
  int result = n;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

int moebius(int n) {
  int mu = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      mu = -mu;
    }
  }
  if (n > 1) mu = -mu;
  return mu;
}

}  // namespace

ClassCount class_count(int rank, int n) {
  check_rank(rank);
  if (n < 1) throw Error(Errc::InvalidArgument, "word length must be >= 1");
  const auto traces = trace_powers(rank, n);
  // Burnside over the cyclic group of rotations; Moebius for aperiodic orbits.
  std::uint64_t burnside = 0;
  std::int64_t aperiodic = 0;
  for (int d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    burnside = checked_add(burnside, checked_mul(static_cast<std::uint64_t>(euler_phi(n / d)), traces[d]));
    aperiodic += static_cast<std::int64_t>(moebius(n / d)) * static_cast<std::int64_t>(traces[d]);
  }
  ClassCount out;
  out.words = traces[n];
  out.classes = burnside / static_cast<std::uint64_t>(n);
  out.primitive = static_cast<std::uint64_t>(aperiodic / n);
  return out;
}

std::uint64_t total_class_count(int rank, int n_max, bool include_powers) {
  std::uint64_t total = 0;
  for (int n = 1; n <= n_max; ++n) {
    const ClassCount c = class_count(rank, n);
    total = checked_add(total, include_powers ? c.classes : c.primitive);
  }
  return total;
}

namespace {

// Depth-first walk over cyclically reduced prenecklaces. `word` holds the
// current prefix; `p` is the length of its longest Lyndon prefix, so the word
// is a necklace exactly when size % p == 0.
struct Walker {
  const EnumerationOptions& opts;
  const std::function<void(const ClassView&)>& visit;
  Letters word;
  int max_depth;

  void emit(int p) {
    const std::size_t t = word.size();
    if (t > 1 && word.back() == word.front().inverse()) return;
    if (t % static_cast<std::size_t>(p) != 0) return;
    if (!opts.include_powers && static_cast<std::size_t>(p) != t) return;
    visit(ClassView{std::span<const Letter>(word), p});
  }

  void descend(int p) {
    const int t = static_cast<int>(word.size());
    if (t >= 1) emit(p);
    if (t >= max_depth) return;
    const int letters = 2 * opts.rank;
    const int floor_code = t == 0 ? 0 : word[t - p].code();
    for (int code = floor_code; code < letters; ++code) {
      const Letter next = Letter::from_code(code);
      if (t > 0 && next == word.back().inverse()) continue;
      word.push_back(next);
      descend(t == 0 ? 1 : (code == floor_code ? p : t + 1));
      word.pop_back();
    }
  }
};

}  // namespace

void check_enumeration_budget(const EnumerationOptions& opts) {
  check_rank(opts.rank);
  if (opts.n_max < 1) throw Error(Errc::InvalidArgument, "n_max must be >= 1");
  const std::uint64_t projected = total_class_count(opts.rank, opts.n_max, opts.include_powers);
  if (projected > opts.max_classes) {
    throw Error(Errc::CutoffTooLarge, "projected class count " + std::to_string(projected) +
                                          " exceeds budget " + std::to_string(opts.max_classes));
  }
}

namespace {

// Lyndon period of a prenecklace prefix, or 0 if it is not one.
int prenecklace_period(std::span<const Letter> prefix) {
  int p = 1;
  for (std::size_t t = 1; t < prefix.size(); ++t) {
    const Letter ref = prefix[t - p];
    if (prefix[t] < ref) return 0;
    if (prefix[t] > ref) p = static_cast<int>(t) + 1;
  }
  return p;
}

}  // namespace

std::vector<EnumerationShard> enumeration_shards(const EnumerationOptions& opts, int prefix_length) {
  check_rank(opts.rank);
  prefix_length = std::clamp(prefix_length, 1, std::max(1, opts.n_max));
  std::vector<EnumerationShard> shards;
  shards.push_back(EnumerationShard{{}, prefix_length, 0});
  // All reduced prenecklace prefixes of the requested length, in lex order.
  std::vector<Letters> frontier{{}};
  for (int depth = 0; depth < prefix_length; ++depth) {
    std::vector<Letters> next;
    for (const auto& w : frontier) {
      for (int code = 0; code < 2 * opts.rank; ++code) {
        const Letter l = Letter::from_code(code);
        if (!w.empty() && l == w.back().inverse()) continue;
        Letters ext = w;
        ext.push_back(l);
        if (prenecklace_period(ext) == 0) continue;
        next.push_back(std::move(ext));
      }
    }
    frontier = std::move(next);
  }
  for (auto& prefix : frontier) {
    const int p = prenecklace_period(prefix);
    shards.push_back(EnumerationShard{std::move(prefix), prefix_length, p});
  }
  return shards;
}

void for_each_class(const EnumerationOptions& opts, const EnumerationShard& shard,
                    const std::function<void(const ClassView&)>& visit) {
  check_rank(opts.rank);
  if (shard.prefix.empty()) {
    Walker walker{opts, visit, {}, std::min(opts.n_max, shard.prefix_length - 1)};
    walker.word.reserve(opts.n_max);
    walker.descend(0);
    return;
  }
  if (static_cast<int>(shard.prefix.size()) > opts.n_max) return;
  Walker walker{opts, visit, shard.prefix, opts.n_max};
  walker.word.reserve(opts.n_max);
  walker.descend(shard.lyndon_period);
}

void for_each_class(const EnumerationOptions& opts, const std::function<void(const ClassView&)>& visit) {
  check_enumeration_budget(opts);
  Walker walker{opts, visit, {}, opts.n_max};
  walker.word.reserve(opts.n_max);
  walker.descend(0);
}

std::vector<ConjClass> enumerate_classes(const EnumerationOptions& opts) {
  check_enumeration_budget(opts);
  std::vector<ConjClass> out;
  out.reserve(total_class_count(opts.rank, opts.n_max, opts.include_powers));
  for_each_class(opts, [&](const ClassView& v) {
    Letters letters(v.letters.begin(), v.letters.end());
    out.push_back(ConjClass::from_canonical(std::move(letters)));
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace corrnum
