#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace corrnum {

// Neumaier compensated accumulator.
template <typename Scalar = double>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(Scalar x) {
    add(x);
    return *this;
  }
  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_ = 0;
  Scalar comp_ = 0;
};

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  double residual_rms = 0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope * x. Needs at least two
// distinct abscissae; slope_stderr is zero when there are only two points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
// Weighted least squares; weights must be positive. slope_stderr uses the
// weighted residual variance.
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w);

struct QuadraticFit {
  double c0 = 0, c1 = 0, c2 = 0;  // y = c0 + c1 (x - x0) + c2 (x - x0)^2
  double x0 = 0;
  double residual_rms = 0;

  double value(double x) const {
    const double t = x - x0;
    return c0 + t * (c1 + t * c2);
  }
  double derivative(double x) const { return c1 + 2 * c2 * (x - x0); }
};

// Least-squares quadratic centred at x0.
QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y, double x0);

}  // namespace corrnum
