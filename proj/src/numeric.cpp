#include "corrnum/numeric.hpp"

#include <Eigen/Dense>

#include "corrnum/error.hpp"

namespace corrnum {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::InvalidArgument, "line fit needs >= 2 points");
  const std::size_t n = x.size();
  CompensatedSum<> sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum<> sxx, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  if (!(sxx.value() > 0)) throw Error(Errc::InvalidArgument, "line fit with constant abscissa");
  LineFit fit;
  fit.points = n;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  CompensatedSum<> ssr;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.residual_rms = std::sqrt(ssr.value() / n);
  if (n > 2) fit.slope_stderr = std::sqrt(ssr.value() / (n - 2) / sxx.value());
  return fit;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) {
    throw Error(Errc::InvalidArgument, "weighted line fit needs >= 2 points");
  }
  const std::size_t n = x.size();
  CompensatedSum<> sw, sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0)) throw Error(Errc::InvalidArgument, "line fit weights must be positive");
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx.value() / sw.value();
  const double my = sy.value() / sw.value();
  CompensatedSum<> sxx, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - my);
  }
  if (!(sxx.value() > 0)) throw Error(Errc::InvalidArgument, "line fit with constant abscissa");
  LineFit fit;
  fit.points = n;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  CompensatedSum<> ssr, wssr;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
    wssr += w[i] * r * r;
  }
  fit.residual_rms = std::sqrt(ssr.value() / n);
  if (n > 2) fit.slope_stderr = std::sqrt(wssr.value() / (n - 2) / sxx.value());
  return fit;
}

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y, double x0) {
  if (x.size() != y.size() || x.size() < 3) throw Error(Errc::InvalidArgument, "quadratic fit needs >= 3 points");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = x[i] - x0;
    design(i, 0) = 1;
    design(i, 1) = t;
    design(i, 2) = t * t;
    rhs(i) = y[i];
  }
  const Eigen::Vector3d c = design.colPivHouseholderQr().solve(rhs);
  QuadraticFit fit;
  fit.x0 = x0;
  fit.c0 = c(0);
  fit.c1 = c(1);
  fit.c2 = c(2);
  fit.residual_rms = std::sqrt((design * c - rhs).squaredNorm() / n);
  return fit;
}

}  // namespace corrnum
