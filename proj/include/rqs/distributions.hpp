#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "rqs/errors.hpp"
#include "rqs/numeric.hpp"

namespace rqs {

/// Analytic laws for bit-string probabilities of random states.
///
/// Every law describes a scaled variable x = D p, where p is a raw
/// probability and D is the dimension the law is normalized against
/// (N for the full system, M for a subsystem or a conditional slice).
/// Depolarizing noise of strength lambda maps x to (1 - lambda) x + lambda,
/// so all families accept a nonzero lambda; the Shifted* names exist for the
/// noisy laws that are usually referred to by their own name.
enum class Family {
  FullBeta,             ///< p ~ Beta(1, N - 1)
  SubsystemBeta,        ///< p_A ~ Beta(K, N - K)
  ExpLimit,             ///< x ~ Exp(1), large-N limit of FullBeta
  GammaLimit,           ///< x ~ Gamma(K, 1/K), large-N limit of SubsystemBeta
  ShiftedExpLimit,      ///< lambda + (1 - lambda) Exp(1)
  ShiftedSubsystemBeta, ///< noisy SubsystemBeta
  ConditionalBeta,      ///< p(y|b) ~ Beta(1, M - 1)
};

inline std::string_view to_string(Family f) {
  switch (f) {
  case Family::FullBeta:
    return "full-beta";
  case Family::SubsystemBeta:
    return "subsystem-beta";
  case Family::ExpLimit:
    return "exp-limit";
  case Family::GammaLimit:
    return "gamma-limit";
  case Family::ShiftedExpLimit:
    return "shifted-exp-limit";
  case Family::ShiftedSubsystemBeta:
    return "shifted-subsystem-beta";
  case Family::ConditionalBeta:
    return "conditional-beta";
  }
  return "unknown";
}

inline Family family_from_string(std::string_view name) {
  for (Family f : {Family::FullBeta, Family::SubsystemBeta, Family::ExpLimit,
                   Family::GammaLimit, Family::ShiftedExpLimit,
                   Family::ShiftedSubsystemBeta, Family::ConditionalBeta}) {
    if (to_string(f) == name)
      return f;
  }
  throw ArgumentError("unknown distribution family '" + std::string(name) + "'");
}

/// A named analytic law. N is the full dimension, M the subsystem-A
/// dimension and K the subsystem-B dimension; `scaled` selects whether
/// pdf/cdf take the scaled variable x or the raw probability p.
struct AnalyticLaw {
  Family family = Family::FullBeta;
  std::uint64_t N = 0;
  std::uint64_t M = 0;
  std::uint64_t K = 1;
  double lambda = 0.0;
  bool scaled = true;

  friend bool operator==(const AnalyticLaw &, const AnalyticLaw &) = default;
};

inline AnalyticLaw full_beta(std::uint64_t N, double lambda = 0.0,
                             bool scaled = true) {
  return {Family::FullBeta, N, N, 1, lambda, scaled};
}

inline AnalyticLaw subsystem_beta(std::uint64_t N, std::uint64_t K,
                                  double lambda = 0.0, bool scaled = true) {
  const std::uint64_t M = K == 0 ? 0 : N / K;
  return {lambda > 0.0 ? Family::ShiftedSubsystemBeta : Family::SubsystemBeta,
          N, M, K, lambda, scaled};
}

/// N is only needed to evaluate the law in raw coordinates.
inline AnalyticLaw exp_limit(double lambda = 0.0, std::uint64_t N = 0) {
  return {lambda > 0.0 ? Family::ShiftedExpLimit : Family::ExpLimit, N, N, 1,
          lambda, true};
}

inline AnalyticLaw gamma_limit(std::uint64_t K, double lambda = 0.0,
                               std::uint64_t M = 0) {
  return {Family::GammaLimit, M * K, M, K, lambda, true};
}

/// Law of one component of a conditional slice of dimension M.
inline AnalyticLaw conditional_beta(std::uint64_t M, double lambda = 0.0,
                                    bool scaled = true) {
  return {Family::ConditionalBeta, M, M, 1, lambda, scaled};
}

namespace detail {

enum class Shape { Beta, Gamma };

// Canonical noiseless form: x = scale * p with p ~ Beta(a, b), or
// x ~ Gamma(shape a, rate b).
struct IdealForm {
  Shape shape;
  double a;
  double b;
  double scale; // raw -> scaled factor D; 0 when unknown
};

inline void require(bool ok, const char *what) {
  if (!ok)
    throw ArgumentError(what);
}

inline IdealForm ideal_form(const AnalyticLaw &law) {
  require(law.lambda >= 0.0 && law.lambda < 1.0,
          "lambda must lie in [0, 1); lambda = 1 is a point mass at x = 1");
  const auto N = static_cast<double>(law.N);
  const auto M = static_cast<double>(law.M);
  const auto K = static_cast<double>(law.K);
  switch (law.family) {
  case Family::FullBeta:
    require(law.N >= 2, "FullBeta needs N >= 2");
    return {Shape::Beta, 1.0, N - 1.0, N};
  case Family::SubsystemBeta:
  case Family::ShiftedSubsystemBeta:
    require(law.K >= 1 && law.M >= 2 && law.M * law.K == law.N,
            "SubsystemBeta needs N = M K with M >= 2");
    return {Shape::Beta, K, N - K, M};
  case Family::ConditionalBeta:
    require(law.M >= 2, "ConditionalBeta needs M >= 2");
    return {Shape::Beta, 1.0, M - 1.0, M};
  case Family::ExpLimit:
  case Family::ShiftedExpLimit:
    return {Shape::Gamma, 1.0, 1.0, N};
  case Family::GammaLimit:
    require(law.K >= 1, "GammaLimit needs K >= 1");
    return {Shape::Gamma, K, K, M};
  }
  throw ArgumentError("unknown family");
}

inline double raw_scale(const AnalyticLaw &law, const IdealForm &form) {
  if (law.scaled)
    return 1.0;
  require(form.scale > 0.0, "raw coordinates need the dimension of the law");
  return form.scale;
}

inline double ideal_log_pdf(const IdealForm &f, double x) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (f.shape == Shape::Beta) {
    const double p = x / f.scale;
    if (p < 0.0 || p > 1.0)
      return neg_inf;
    double log_f = -log_beta(f.a, f.b) - std::log(f.scale);
    if (f.a != 1.0)
      log_f += (f.a - 1.0) * std::log(p);
    if (f.b != 1.0)
      log_f += (f.b - 1.0) * std::log1p(-p);
    return log_f;
  }
  if (x < 0.0)
    return neg_inf;
  // Gamma(shape a, rate b)
  double log_f = f.a * std::log(f.b) - std::lgamma(f.a) - f.b * x;
  if (f.a != 1.0)
    log_f += (f.a - 1.0) * std::log(x);
  return log_f;
}

inline double ideal_cdf(const IdealForm &f, double x) {
  if (x <= 0.0)
    return 0.0;
  if (f.shape == Shape::Beta) {
    const double p = x / f.scale;
    if (p >= 1.0)
      return 1.0;
    if (f.a == 1.0)
      return -std::expm1(f.b * std::log1p(-p));
    return incomplete_beta(f.a, f.b, p);
  }
  if (f.a == 1.0)
    return -std::expm1(-f.b * x);
  return incomplete_gamma_p(f.a, f.b * x);
}

} // namespace detail

/// Checks the law's parameters; throws ArgumentError when inconsistent.
inline void validate(const AnalyticLaw &law) { (void)detail::ideal_form(law); }

/// Support [lo, hi] in the law's own coordinates (hi may be +inf).
struct Support {
  double lo;
  double hi;
};

inline Support support(const AnalyticLaw &law) {
  const auto form = detail::ideal_form(law);
  const double d = detail::raw_scale(law, form);
  const double hi = form.shape == detail::Shape::Beta
                        ? law.lambda + (1.0 - law.lambda) * form.scale
                        : std::numeric_limits<double>::infinity();
  return {law.lambda / d, hi / d};
}

/// Probability density at v; exactly 0 outside the support.
inline double pdf(const AnalyticLaw &law, double v) {
  const auto form = detail::ideal_form(law);
  const double d = detail::raw_scale(law, form);
  const double keep = 1.0 - law.lambda;
  const double x = d * v;
  if (x < law.lambda)
    return 0.0;
  const double u = (x - law.lambda) / keep;
  return d * std::exp(detail::ideal_log_pdf(form, u)) / keep;
}

/// Cumulative distribution at v.
inline double cdf(const AnalyticLaw &law, double v) {
  const auto form = detail::ideal_form(law);
  const double d = detail::raw_scale(law, form);
  const double x = d * v;
  if (x <= law.lambda)
    return 0.0;
  return detail::ideal_cdf(form, (x - law.lambda) / (1.0 - law.lambda));
}

struct Moments {
  double mean;
  double variance;
};

inline Moments moments(const AnalyticLaw &law) {
  const auto form = detail::ideal_form(law);
  const double d = detail::raw_scale(law, form);
  double mean, var;
  if (form.shape == detail::Shape::Beta) {
    const double s = form.a + form.b;
    mean = form.scale * form.a / s;
    var = form.scale * form.scale * form.a * form.b / (s * s * (s + 1.0));
  } else {
    mean = form.a / form.b;
    var = form.a / (form.b * form.b);
  }
  const double keep = 1.0 - law.lambda;
  return {(law.lambda + keep * mean) / d, keep * keep * var / (d * d)};
}

/// Inverse CDF by bisection; q in [0, 1].
inline double quantile(const AnalyticLaw &law, double q) {
  if (!(q >= 0.0 && q <= 1.0))
    throw ArgumentError("quantile level must lie in [0, 1]");
  const auto [lo0, hi0] = support(law);
  double lo = lo0;
  double hi = hi0;
  if (q == 0.0)
    return lo;
  if (std::isinf(hi)) {
    hi = lo + 1.0;
    while (cdf(law, hi) < q)
      hi = lo + 2.0 * (hi - lo);
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(law, mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Large-N limit of a finite Beta law: FullBeta and ConditionalBeta tend to
/// the exponential law, SubsystemBeta to Gamma(K, 1/K) (exponential at
/// K = 1). Noise strength is preserved; the result is in scaled coordinates.
inline AnalyticLaw limit_law(const AnalyticLaw &law) {
  validate(law);
  switch (law.family) {
  case Family::FullBeta:
    return exp_limit(law.lambda, law.N);
  case Family::ConditionalBeta:
    return exp_limit(law.lambda, law.M);
  case Family::SubsystemBeta:
  case Family::ShiftedSubsystemBeta:
    if (law.K == 1)
      return exp_limit(law.lambda, law.N);
    return gamma_limit(law.K, law.lambda, law.M);
  default:
    throw ArgumentError("family '" + std::string(to_string(law.family)) +
                        "' has no large-N limit");
  }
}

} // namespace rqs
