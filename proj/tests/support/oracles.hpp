#pragma once

// Test-only oracles, kept independent of the library code paths they check:
// quadrature, reference densities, finite differences and two-sample tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "condwalk/types.hpp"

namespace oracles {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double gamma_log_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape);
}

/// Density of (S_n - n)/sqrt(n) for S_n a sum of n Exp(1) draws.
inline double standardized_gamma_pdf(double z, int n) {
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  return sqrt_n * std::exp(gamma_log_pdf(n + sqrt_n * z, n, 1.0));
}

/// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  return acc * h / 3.0;
}

/// Tensorized Simpson on a rectangle (for d=2 integrands).
inline double simpson2(const std::function<double(double, double)>& f, double ax, double bx,
                       double ay, double by, int intervals) {
  return simpson(
      [&](double x) {
        return simpson([&, x](double y) { return f(x, y); }, ay, by, intervals);
      },
      ax, bx, intervals);
}

/// Nested central differences for mixed partial derivatives, with one
/// Richardson extrapolation step: error O(h^4).
inline double mixed_partial(const std::function<double(const condwalk::Vector&)>& f,
                            condwalk::Vector x, const std::vector<int>& dims, double h) {
  std::function<double(condwalk::Vector&, std::size_t, double)> rec =
      [&](condwalk::Vector& point, std::size_t level, double step) -> double {
    if (level == dims.size()) return f(point);
    const int j = dims[level];
    point(j) += step;
    const double plus = rec(point, level + 1, step);
    point(j) -= 2.0 * step;
    const double minus = rec(point, level + 1, step);
    point(j) += step;
    return (plus - minus) / (2.0 * step);
  };
  condwalk::Vector p = x;
  const double coarse = rec(p, 0, h);
  const double fine = rec(p, 0, h / 2.0);
  const double order = std::pow(4.0, 1.0);
  return (order * fine - coarse) / (order - 1.0);
}

/// High-accuracy mixed partials for smooth functions: nested five-point
/// stencils (O(h^4) per level) plus two Richardson steps, leaving O(h^8)
/// truncation. Used where sixth derivatives must come out to ~1e-5 relative.
inline double mixed_partial_hi(const std::function<double(const condwalk::Vector&)>& f,
                               condwalk::Vector x, const std::vector<int>& dims, double h) {
  std::function<double(condwalk::Vector&, std::size_t, double)> rec =
      [&](condwalk::Vector& point, std::size_t level, double step) -> double {
    if (level == dims.size()) return f(point);
    const int j = dims[level];
    const double save = point(j);
    point(j) = save + 2.0 * step;
    const double p2 = rec(point, level + 1, step);
    point(j) = save + step;
    const double p1 = rec(point, level + 1, step);
    point(j) = save - step;
    const double m1 = rec(point, level + 1, step);
    point(j) = save - 2.0 * step;
    const double m2 = rec(point, level + 1, step);
    point(j) = save;
    return (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * step);
  };
  condwalk::Vector p = x;
  const double d0 = rec(p, 0, h);
  const double d1 = rec(p, 0, h / 2.0);
  const double d2 = rec(p, 0, h / 4.0);
  const double r0 = (16.0 * d1 - d0) / 15.0;  // kills h^4
  const double r1 = (16.0 * d2 - d1) / 15.0;
  return (64.0 * r1 - r0) / 63.0;  // kills h^6
}

/// Asymptotic Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_tail(double lambda) {
  double acc = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
    acc += (j % 2 == 1 ? term : -term);
    if (term < 1e-12) break;
  }
  return std::clamp(acc, 0.0, 1.0);
}

/// One-sample KS p-value against a cdf.
inline double ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return kolmogorov_tail((std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d);
}

/// Two-sample KS p-value.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  const double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                    static_cast<double>(a.size() + b.size());
  return kolmogorov_tail((std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d);
}

/// Regularized upper incomplete gamma Q(s, x) by series / continued fraction.
inline double gamma_q(double s, double x) {
  if (x < 0.0 || s <= 0.0) return 1.0;
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) {
    // lower series
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (s + n);
      sum += term;
      if (term < sum * 1e-15) break;
    }
    const double p = sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    return 1.0 - p;
  }
  // upper continued fraction (modified Lentz)
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

/// Chi-square upper-tail p-value with dof degrees of freedom.
inline double chi_square_pvalue(double statistic, int dof) {
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

}  // namespace oracles
