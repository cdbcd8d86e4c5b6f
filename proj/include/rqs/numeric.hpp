#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

namespace rqs {

/// Vectors at least this long are summed with Neumaier compensation.
inline constexpr std::size_t kCompensatedSumThreshold = std::size_t{1} << 20;

/// Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

/// Sum that switches to compensated summation for long inputs.
inline double total(std::span<const double> xs) {
  if (xs.size() >= kCompensatedSumThreshold)
    return compensated_sum(xs);
  double sum = 0.0;
  for (double x : xs)
    sum += x;
  return sum;
}

namespace detail {

template <class F>
double simpson_step(const F &f, double a, double b, double fa, double fm,
                    double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol)
    return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance `tol`.
///
/// The interval is first cut into `pieces` equal panels so that a narrow
/// peak cannot hide between the initial sample points.
template <class F>
double integrate(const F &f, double a, double b, double tol = 1e-10,
                 int pieces = 16, int max_depth = 48) {
  if (!(b > a))
    return 0.0;
  double sum = 0.0;
  const double h = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == pieces) ? b : a + (i + 1) * h;
    const double fa = f(lo);
    const double fb = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    sum += detail::simpson_step(f, lo, hi, fa, fm, fb, whole, tol / pieces,
                                max_depth);
  }
  return sum;
}

namespace detail {

// lgamma(z) - [(z - 1/2) log z - z + log(2 pi) / 2], accurate for z >= 20.
inline double stirling_correction(double z) {
  const double r = 1.0 / z;
  const double r2 = r * r;
  return r * (1.0 / 12.0 -
              r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)));
}

} // namespace detail

/// lgamma(b + a) - lgamma(b) without the cancellation of the direct
/// difference when b is large.
inline double log_gamma_ratio(double b, double a) {
  if (b < 20.0)
    return std::lgamma(b + a) - std::lgamma(b);
  return (b - 0.5) * std::log1p(a / b) + a * std::log(b + a) - a +
         detail::stirling_correction(b + a) - detail::stirling_correction(b);
}

/// log B(a, b), accurate when one argument is many orders of magnitude
/// larger than the other.
inline double log_beta(double a, double b) {
  if (a > b)
    std::swap(a, b);
  if (a == 1.0)
    return -std::log(b);
  return std::lgamma(a) - log_gamma_ratio(b, a);
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-14;
  constexpr int max_iter = 200000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny)
    d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps)
      return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

} // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Regularized lower incomplete gamma function P(a, x).
inline double incomplete_gamma_p(double a, double x) {
  if (x <= 0.0)
    return 0.0;
  constexpr double eps = 1e-15;
  constexpr int max_iter = 100000;
  const double log_front = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < max_iter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps)
        return sum * std::exp(log_front);
    }
    throw std::runtime_error("incomplete gamma series did not converge");
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny)
      d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps)
      return 1.0 - std::exp(log_front) * h;
  }
  throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

} // namespace rqs
