#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rqs/distributions.hpp"
#include "rqs/errors.hpp"

namespace rqs {

/// Asymptotic 1% coefficient of the Kolmogorov distribution.
inline constexpr double kKsCoefficient1pct = 1.63;

/// Density histogram over uniform bins.
///
/// Densities are normalized by the total sample count, overflow included, so
/// they are directly comparable with a pdf and integrate to
/// 1 - overflow / count.
struct Histogram {
  std::vector<double> edges;     ///< bins + 1 ascending edges
  std::vector<double> densities; ///< one per bin
  std::uint64_t count = 0;       ///< all samples, including overflow
  std::uint64_t overflow = 0;    ///< samples outside [edges.front(), edges.back()]

  std::size_t bins() const noexcept { return densities.size(); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  double midpoint(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
};

/// Outcome of a Kolmogorov-Smirnov test at the 1% level.
struct GofReport {
  double ks_statistic = 0.0;
  double ks_critical_1pct = 0.0;
  std::uint64_t n_samples = 0;
  bool passed = false;
  double sup_location = 0.0; ///< x at which the sup deviation is attained
};

/// Histogram of `samples` with `bins` uniform bins on [lo, hi]. The value hi
/// falls in the last bin; anything outside the range is tallied as overflow.
inline Histogram histogram(std::span<const double> samples, std::size_t bins,
                           double lo, double hi) {
  if (samples.empty())
    throw ArgumentError("histogram of an empty sample");
  if (bins < 1)
    throw ArgumentError("histogram needs at least one bin");
  if (!(lo < hi))
    throw ArgumentError("histogram range must satisfy lo < hi");

  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;

  std::vector<std::uint64_t> counts(bins, 0);
  for (double x : samples) {
    if (!(x >= lo && x <= hi)) {
      ++h.overflow;
      continue;
    }
    auto idx = static_cast<std::size_t>((x - lo) / width);
    idx = std::min(idx, bins - 1);
    // guard against rounding at interior edges
    while (idx > 0 && x < h.edges[idx])
      --idx;
    while (idx + 1 < bins && x >= h.edges[idx + 1])
      ++idx;
    ++counts[idx];
  }
  h.count = samples.size();
  h.densities.resize(bins);
  const auto total = static_cast<double>(h.count);
  for (std::size_t i = 0; i < bins; ++i)
    h.densities[i] = static_cast<double>(counts[i]) / (total * h.width(i));
  return h;
}

/// Default plotting range in scaled coordinates: [0, max(10, lambda + 8 (1 - lambda))].
inline double default_histogram_upper(double lambda) {
  return std::max(10.0, lambda + 8.0 * (1.0 - lambda));
}

inline constexpr std::size_t kDefaultBins = 50;

inline double ks_critical_one_sample(std::uint64_t n) {
  return kKsCoefficient1pct / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::uint64_t na, std::uint64_t nb) {
  const auto a = static_cast<double>(na);
  const auto b = static_cast<double>(nb);
  return kKsCoefficient1pct * std::sqrt((a + b) / (a * b));
}

/// One-sample KS test of `samples` against the cdf of `law`.
template <class Cdf>
GofReport ks_one_sample(std::span<const double> samples, const Cdf &cdf_fn) {
  if (samples.empty())
    throw ArgumentError("KS test of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto S = static_cast<double>(sorted.size());
  GofReport r;
  r.n_samples = sorted.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = cdf_fn(sorted[i]);
    const double above = static_cast<double>(i + 1) / S - F;
    const double below = F - static_cast<double>(i) / S;
    const double d = std::max(above, below);
    if (d > r.ks_statistic) {
      r.ks_statistic = d;
      r.sup_location = sorted[i];
    }
  }
  r.ks_critical_1pct = ks_critical_one_sample(r.n_samples);
  r.passed = r.ks_statistic < r.ks_critical_1pct;
  return r;
}

inline GofReport ks_one_sample(std::span<const double> samples, const AnalyticLaw &law) {
  validate(law);
  return ks_one_sample(samples, [&law](double x) { return cdf(law, x); });
}

/// Two-sample KS test. Ties across the samples are stepped over together.
inline GofReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw ArgumentError("KS test of an empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());
  GofReport r;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x)
      ++i;
    while (j < sb.size() && sb[j] == x)
      ++j;
    const double d = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    if (d > r.ks_statistic) {
      r.ks_statistic = d;
      r.sup_location = x;
    }
  }
  r.n_samples = sa.size() + sb.size();
  r.ks_critical_1pct = ks_critical_two_sample(sa.size(), sb.size());
  r.passed = r.ks_statistic < r.ks_critical_1pct;
  return r;
}

/// Depolarizing-gap estimate: the smallest observed scaled probability.
///
/// For exactly depolarized inputs this never falls below lambda and
/// approaches it from above as the sample grows. Hardware data with readout
/// smearing can violate the bound.
inline double estimate_gap(std::span<const double> scaled_samples) {
  if (scaled_samples.empty())
    throw ArgumentError("gap estimate of an empty sample");
  return *std::min_element(scaled_samples.begin(), scaled_samples.end());
}

inline double mean(std::span<const double> xs) {
  if (xs.empty())
    throw ArgumentError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs)
    s += x;
  return s / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2)
    throw ArgumentError("variance needs at least two samples");
  const double mu = mean(xs);
  double s = 0.0;
  for (double x : xs)
    s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size() - 1);
}

/// Sample Pearson correlation coefficient.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ArgumentError("pearson needs two equally long samples of size >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Dimensions of the ideal law a scaled sample is compared against.
struct LawShape {
  std::uint64_t N;
  std::uint64_t M;
  std::uint64_t K;
};

/// Moment estimate of lambda. Noise leaves the mean of the scaled variable
/// at 1 and multiplies its variance by (1 - lambda)^2, so
/// lambda = 1 - sqrt(var / var_ideal), clamped to [0, 1].
inline double estimate_lambda_mean(std::span<const double> scaled_samples,
                                   const LawShape &shape) {
  const double ideal =
      moments(subsystem_beta(shape.N, shape.K, 0.0, true)).variance;
  const double ratio = variance(scaled_samples) / ideal;
  return std::clamp(1.0 - std::sqrt(ratio), 0.0, 1.0);
}

} // namespace rqs
