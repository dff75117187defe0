#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "corrnum/error.hpp"
#include "corrnum/freegroup.hpp"

namespace corrnum {

namespace detail {

inline std::vector<std::vector<int>> k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// k-th compound matrix: minors indexed by k-subsets in lexicographic order.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> compound(const Eigen::MatrixBase<Derived>& m,
                                                                                 int k) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto subsets = k_subsets(static_cast<int>(m.rows()), k);
  const Eigen::Index size = static_cast<Eigen::Index>(subsets.size());
  Matrix out(size, size);
  Matrix minor(k, k);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < size; ++c) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = m(subsets[r][i], subsets[c][j]);
      out(r, c) = minor.determinant();
    }
  }
  return out;
}

template <typename Scalar>
Scalar spectral_radius(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
  using std::abs;
  using std::sqrt;
  if (m.rows() == 1) return abs(m(0, 0));
  if (m.rows() == 2) {
    const Scalar tr = m(0, 0) + m(1, 1);
    const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const Scalar disc = tr * tr - 4 * det;
    if (disc < 0) return sqrt(abs(det));
    const Scalar big = (abs(tr) + sqrt(disc)) / 2;
    return big;
  }
  Eigen::EigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

// Sorted logarithms of eigenvalue moduli, shifted to sum to zero.
template <typename Scalar>
class JordanVector {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit JordanVector(Vector entries) : entries_(std::move(entries)) {
    for (Eigen::Index i = 0; i + 1 < entries_.size(); ++i) {
      if (entries_(i) < entries_(i + 1)) throw Error(Errc::InvalidArgument, "Jordan vector must be nonincreasing");
    }
    using std::abs;
    if (abs(entries_.sum()) > Scalar(1e-9) * std::max<Scalar>(Scalar(1), entries_.cwiseAbs().maxCoeff())) {
      throw Error(Errc::InvalidArgument, "Jordan vector must sum to zero");
    }
  }

  const Vector& entries() const { return entries_; }
  Scalar operator[](Eigen::Index i) const { return entries_(i); }
  Eigen::Index size() const { return entries_.size(); }

 private:
  Vector entries_;
};

// Nonnegative combination of simple roots x_i - x_{i+1}, times a scale.
class LengthFunctional {
 public:
  LengthFunctional(std::vector<double> coefficients, double scale = 1.0);

  static LengthFunctional alpha(int index, int dimension);  // 1-based simple root
  static LengthFunctional hilbert(int dimension);           // (1/2)(x_1 - x_d)
  // "alpha1", "hilbert", "phi[c1,c2,...]", each optionally followed by "*scale".
  static LengthFunctional parse(const std::string& descriptor, int dimension);

  const std::vector<double>& coefficients() const { return coefficients_; }
  double scale() const { return scale_; }
  int dimension() const { return static_cast<int>(coefficients_.size()) + 1; }
  std::string descriptor() const;

  template <typename Scalar>
  Scalar operator()(const JordanVector<Scalar>& lambda) const {
    if (lambda.size() != dimension()) throw Error(Errc::InvalidArgument, "functional/Jordan dimension mismatch");
    Scalar acc = 0;
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      acc += Scalar(coefficients_[i]) * (lambda[k] - lambda[k + 1]);
    }
    return Scalar(scale_) * acc;
  }

 private:
  std::vector<double> coefficients_;
  double scale_ = 1.0;
};

struct RepresentationParameter {
  std::string name;
  double value;
};

template <typename Scalar_>
class BasicRepresentation {
 public:
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BasicRepresentation(std::string label, std::vector<Matrix> generators, Scalar eig_tolerance = Scalar(1e-10),
                      std::vector<RepresentationParameter> parameters = {})
      : label_(std::move(label)),
        generators_(std::move(generators)),
        eig_tolerance_(eig_tolerance),
        parameters_(std::move(parameters)) {
    if (generators_.size() < 2) throw Error(Errc::InvalidArgument, "representation needs rank >= 2");
    const Eigen::Index d = generators_.front().rows();
    if (d < 2) throw Error(Errc::InvalidArgument, "representation needs dimension >= 2");
    if (!(eig_tolerance_ > 0)) throw Error(Errc::InvalidArgument, "eig_tolerance must be positive");
    using std::abs;
    for (const auto& g : generators_) {
      if (g.rows() != d || g.cols() != d) throw Error(Errc::InvalidArgument, "generator images must be d x d");
      if (!g.allFinite()) throw Error(Errc::InvalidArgument, "generator image has non-finite entries");
      if (abs(abs(g.determinant()) - Scalar(1)) > Scalar(1e-9)) {
        throw Error(Errc::InvalidArgument, "generator image of '" + label_ + "' is not unimodular");
      }
      Matrix inv = g.partialPivLu().inverse();
      const Scalar residual = (g * inv - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
      const Scalar scale = std::max<Scalar>(Scalar(1), g.cwiseAbs().maxCoeff() * inv.cwiseAbs().maxCoeff());
      if (residual > Scalar(1e-12) * scale) throw Error(Errc::InvalidArgument, "generator inversion is inaccurate");
      inverses_.push_back(std::move(inv));
    }
    compounds_.resize(d);  // compounds_[k] for k = 1..d-1, indexed by letter code
    for (int k = 1; k < d; ++k) {
      for (int code = 0; code < 2 * rank(); ++code) compounds_[k].push_back(detail::compound(image(Letter::from_code(code)), k));
    }
    for (int code = 0; code < 2 * rank(); ++code) {
      using std::log;
      log_abs_det_.push_back(log(abs(image(Letter::from_code(code)).determinant())));
    }
  }

  const std::string& label() const { return label_; }
  int dimension() const { return static_cast<int>(generators_.front().rows()); }
  int rank() const { return static_cast<int>(generators_.size()); }
  Scalar eig_tolerance() const { return eig_tolerance_; }
  const std::vector<RepresentationParameter>& parameters() const { return parameters_; }
  const std::vector<Matrix>& generators() const { return generators_; }
  const Matrix& generator(int i) const { return generators_.at(i); }
  const Matrix& inverse(int i) const { return inverses_.at(i); }
  const Matrix& image(Letter l) const { return l.sign() > 0 ? generators_.at(l.generator()) : inverses_.at(l.generator()); }
  const Matrix& compound_image(int k, Letter l) const { return compounds_.at(k).at(l.code()); }
  Scalar log_abs_det(Letter l) const { return log_abs_det_.at(l.code()); }

  BasicRepresentation with_label(std::string label) const {
    BasicRepresentation copy = *this;
    copy.label_ = std::move(label);
    return copy;
  }

 private:
  std::string label_;
  std::vector<Matrix> generators_;
  std::vector<Matrix> inverses_;
  std::vector<std::vector<Matrix>> compounds_;
  std::vector<Scalar> log_abs_det_;
  Scalar eig_tolerance_;
  std::vector<RepresentationParameter> parameters_;
};

using Representation = BasicRepresentation<double>;

inline constexpr double kOverflowThreshold = 1e280;

template <typename Scalar>
typename BasicRepresentation<Scalar>::Matrix evaluate(const BasicRepresentation<Scalar>& rep,
                                                      std::span<const Letter> letters) {
  using Matrix = typename BasicRepresentation<Scalar>::Matrix;
  const int d = rep.dimension();
  Matrix product = Matrix::Identity(d, d);
  Matrix scratch(d, d);
  for (Letter l : letters) {
    if (l.generator() >= rep.rank()) throw Error(Errc::InvalidArgument, "letter outside representation rank");
    scratch.noalias() = product * rep.image(l);
    product.swap(scratch);
    if (!(product.cwiseAbs().maxCoeff() <= Scalar(kOverflowThreshold))) {
      throw Error(Errc::Overflow, "matrix entries exceed 1e280; use jordan_projection");
    }
  }
  return product;
}

template <typename Scalar>
typename BasicRepresentation<Scalar>::Matrix evaluate(const BasicRepresentation<Scalar>& rep, const ConjClass& c) {
  return evaluate(rep, std::span<const Letter>(c.letters()));
}

// Log-moduli of the eigenvalues of rep(word), highest first, together with
// the smallest consecutive gap. Each partial sum log|mu_1| + ... + log|mu_k|
// is the log spectral radius of the k-th compound, accumulated with rescaling,
// so long words neither overflow nor lose the small eigenvalues.
template <typename Scalar>
struct EigenProfile {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_moduli;
  Scalar min_log_gap = 0;       // min_k (log|mu_k| - log|mu_{k+1}|)
  Scalar min_relative_gap = 0;  // min_k (1 - |mu_{k+1}| / |mu_k|)
};

template <typename Scalar>
EigenProfile<Scalar> eigen_profile(const BasicRepresentation<Scalar>& rep, std::span<const Letter> letters) {
  using Matrix = typename BasicRepresentation<Scalar>::Matrix;
  using std::abs;
  using std::log;
  if (letters.empty()) throw Error(Errc::IdentityWord, "eigen profile of the identity");
  const int d = rep.dimension();
  std::vector<Scalar> partial(d + 1, Scalar(0));
  Matrix product, scratch;
  for (int k = 1; k < d; ++k) {
    const Eigen::Index m = rep.compound_image(k, letters.front()).rows();
    product = Matrix::Identity(m, m);
    scratch.resize(m, m);
    Scalar log_scale = 0;
    for (Letter l : letters) {
      if (l.generator() >= rep.rank()) throw Error(Errc::InvalidArgument, "letter outside representation rank");
      scratch.noalias() = product * rep.compound_image(k, l);
      product.swap(scratch);
      const Scalar norm = product.cwiseAbs().maxCoeff();
      if (norm > Scalar(1e32) || norm < Scalar(1e-32)) {
        product /= norm;
        log_scale += log(norm);
      }
    }
    const Scalar rho = detail::spectral_radius<Scalar>(product);
    partial[k] = log_scale + log(rho);
  }
  Scalar log_det = 0;
  for (Letter l : letters) log_det += rep.log_abs_det(l);
  partial[d] = log_det;

  EigenProfile<Scalar> out;
  out.log_moduli.resize(d);
  for (int k = 1; k <= d; ++k) out.log_moduli(k - 1) = partial[k] - partial[k - 1];
  out.min_log_gap = std::numeric_limits<Scalar>::infinity();
  for (int k = 0; k + 1 < d; ++k) out.min_log_gap = std::min(out.min_log_gap, out.log_moduli(k) - out.log_moduli(k + 1));
  using std::expm1;
  out.min_relative_gap = -expm1(-out.min_log_gap);
  return out;
}

template <typename Scalar>
JordanVector<Scalar> jordan_projection(const BasicRepresentation<Scalar>& rep, std::span<const Letter> letters) {
  EigenProfile<Scalar> profile = eigen_profile(rep, letters);
  if (!(profile.min_relative_gap > rep.eig_tolerance())) {
    throw Error(Errc::NotLoxodromic, "eigenvalue moduli of '" + to_string(letters) + "' under '" + rep.label() +
                                         "' are not separated");
  }
  auto v = profile.log_moduli;
  v.array() -= v.mean();
  return JordanVector<Scalar>(std::move(v));
}

template <typename Scalar>
JordanVector<Scalar> jordan_projection(const BasicRepresentation<Scalar>& rep, const ConjClass& c) {
  return jordan_projection(rep, std::span<const Letter>(c.letters()));
}

template <typename Scalar>
Scalar length(const BasicRepresentation<Scalar>& rep, std::span<const Letter> letters, const LengthFunctional& phi) {
  if (phi.dimension() != rep.dimension()) throw Error(Errc::InvalidArgument, "functional does not match dimension");
  const Scalar value = phi(jordan_projection(rep, letters));
  if (!(value > 0)) throw Error(Errc::NotLoxodromic, "non-positive length for '" + to_string(letters) + "'");
  return value;
}

template <typename Scalar>
Scalar length(const BasicRepresentation<Scalar>& rep, const ConjClass& c, const LengthFunctional& phi) {
  return length(rep, std::span<const Letter>(c.letters()), phi);
}

// Image of a 2x2 matrix acting on degree (d-1) binary forms, monomial basis
// x^{d-1-j} y^j.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> symmetric_power(
    const Eigen::MatrixBase<Derived>& g, int d) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int m = d - 1;
  auto binomial_row = [](Scalar u, Scalar v, int power) {
    // coefficients of (u e1 + v e2)^power by power of e2
    std::vector<Scalar> c(power + 1, Scalar(0));
    c[0] = 1;
    for (int p = 0; p < power; ++p) {
      for (int i = p + 1; i >= 1; --i) c[i] = c[i] * u + c[i - 1] * v;
      c[0] *= u;
    }
    return c;
  };
  Matrix out = Matrix::Zero(d, d);
  for (int j = 0; j <= m; ++j) {
    const auto first = binomial_row(g(0, 0), g(1, 0), m - j);
    const auto second = binomial_row(g(0, 1), g(1, 1), j);
    for (std::size_t i1 = 0; i1 < first.size(); ++i1)
      for (std::size_t i2 = 0; i2 < second.size(); ++i2) out(static_cast<Eigen::Index>(i1 + i2), j) += first[i1] * second[i2];
  }
  return out;
}

template <typename Scalar>
BasicRepresentation<Scalar> sym_power_embed(const BasicRepresentation<Scalar>& rep2, int d_target) {
  using Matrix = typename BasicRepresentation<Scalar>::Matrix;
  if (rep2.dimension() != 2) throw Error(Errc::InvalidArgument, "sym_power_embed needs a 2-dimensional representation");
  if (d_target < 3) throw Error(Errc::InvalidArgument, "sym_power_embed needs d_target >= 3");
  std::vector<Matrix> images;
  for (const auto& g : rep2.generators()) {
    Matrix s = symmetric_power(g, d_target);
    using std::abs;
    using std::pow;
    s /= pow(abs(s.determinant()), Scalar(1) / Scalar(d_target));
    images.push_back(std::move(s));
  }
  auto params = rep2.parameters();
  params.push_back({"sym_power_d", static_cast<double>(d_target)});
  return BasicRepresentation<Scalar>("sym" + std::to_string(d_target) + "(" + rep2.label() + ")", std::move(images),
                                     rep2.eig_tolerance(), std::move(params));
}

template <typename Scalar>
BasicRepresentation<Scalar> contragredient(const BasicRepresentation<Scalar>& rep) {
  using Matrix = typename BasicRepresentation<Scalar>::Matrix;
  std::vector<Matrix> images;
  for (int i = 0; i < rep.rank(); ++i) images.push_back(rep.inverse(i).transpose());
  return BasicRepresentation<Scalar>(rep.label() + "*", std::move(images), rep.eig_tolerance(), rep.parameters());
}

// Hyperbolic pair in SL(2,R): A translates along the imaginary axis by
// translation_a; B translates by translation_b along the axis obtained by
// rotating the imaginary axis about i through axis_angle.
template <typename Scalar = double>
BasicRepresentation<Scalar> schottky_pair(Scalar translation_a, Scalar translation_b, Scalar axis_angle) {
  using Matrix = typename BasicRepresentation<Scalar>::Matrix;
  using std::cos;
  using std::exp;
  using std::sin;
  if (!(translation_a > 0) || !(translation_b > 0)) throw Error(Errc::InvalidArgument, "translation lengths must be positive");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(axis_angle >= Scalar(1e-3) && axis_angle <= pi - Scalar(1e-3))) {
    throw Error(Errc::DegenerateAxes, "axis angle must lie in [1e-3, pi - 1e-3]");
  }
  Matrix a(2, 2);
  a << exp(translation_a / 2), 0, 0, exp(-translation_a / 2);
  Matrix db(2, 2);
  db << exp(translation_b / 2), 0, 0, exp(-translation_b / 2);
  const Scalar half = axis_angle / 2;
  Matrix r(2, 2);
  r << cos(half), -sin(half), sin(half), cos(half);
  Matrix b = r * db * r.transpose();
  // Commas would clash with the spectrum CSV header.
  char label[96];
  std::snprintf(label, sizeof label, "schottky_%.6g_%.6g_%.6g", static_cast<double>(translation_a),
                static_cast<double>(translation_b), static_cast<double>(axis_angle));
  return BasicRepresentation<Scalar>(label, {a, b}, Scalar(1e-10),
                                     {{"la", static_cast<double>(translation_a)},
                                      {"lb", static_cast<double>(translation_b)},
                                      {"angle", static_cast<double>(axis_angle)}});
}

struct LoxodromyEntry {
  std::string word;
  int word_length = 0;
  double min_relative_gap = 0;
  double min_log_gap = 0;
  double gap_per_letter = 0;
};

struct LoxodromyReport {
  std::vector<LoxodromyEntry> entries;
  std::size_t non_loxodromic = 0;  // classes whose relative gap is within tolerance
  double slope = 0;                // least-squares slope of per-length minimal log gap
  double intercept = 0;
  double min_gap_per_letter = 0;
  bool empirically_anosov = false;
};

struct LoxodromyOptions {
  double min_slope = 0.05;
};

LoxodromyReport validate_loxodromy(const Representation& rep, std::span<const ConjClass> sample,
                                   const LoxodromyOptions& opts = {});

}  // namespace corrnum
