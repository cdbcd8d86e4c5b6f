#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rqs/errors.hpp"
#include "rqs/marginals.hpp"
#include "rqs/rng.hpp"
#include "rqs/state.hpp"

namespace rqs {

struct SampleMeta {
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda_claim;
  std::optional<Partition> partition;

  friend bool operator==(const SampleMeta &, const SampleMeta &) = default;
};

/// Multiset of observed bit-strings. Keys are full indices (qubit 0 = most
/// significant bit); only outcomes seen at least once are stored.
struct SampleSet {
  int n = 0;
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t total = 0;
  SampleMeta meta;

  void add(std::uint64_t index, std::uint64_t count = 1) {
    if (count == 0)
      return;
    counts[index] += count;
    total += count;
  }

  friend bool operator==(const SampleSet &, const SampleSet &) = default;
};

/// Inverse-CDF sampler over a fixed probability vector: one binary search
/// per draw over the precomputed cumulative array.
class CumulativeSampler {
public:
  explicit CumulativeSampler(std::span<const double> probs) : cumulative_(probs.size()) {
    if (probs.empty())
      throw ArgumentError("cannot sample from an empty vector");
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!(probs[i] >= 0.0))
        throw ArgumentError("probabilities must be nonnegative");
      acc += probs[i];
      cumulative_[i] = acc;
    }
    if (!(acc > 0.0))
      throw ArgumentError("probabilities sum to zero");
  }

  std::uint64_t draw(Rng &rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end())
      --it;
    return static_cast<std::uint64_t>(it - cumulative_.begin());
  }

private:
  std::vector<double> cumulative_;
};

/// `shots` i.i.d. draws from the distribution `probs` over 2^n outcomes.
inline SampleSet draw_samples(std::span<const double> probs, int n, std::uint64_t shots,
                              const RngSpec &spec) {
  if (shots < 1)
    throw ArgumentError("shots must be >= 1");
  if (probs.size() != (std::size_t{1} << n))
    throw ArgumentError("probability vector length does not match n");
  CumulativeSampler sampler(probs);
  Rng rng(spec);
  SampleSet s;
  s.n = n;
  s.meta.seed = spec.master_seed;
  for (std::uint64_t i = 0; i < shots; ++i)
    s.add(sampler.draw(rng));
  return s;
}

inline SampleSet draw_samples(const ProbVector &p, std::uint64_t shots,
                              const RngSpec &spec) {
  return draw_samples(p.probs, p.n_qubits, shots, spec);
}

inline SampleSet draw_samples(const DepolarizedProbVector &p, std::uint64_t shots,
                              const RngSpec &spec) {
  auto s = draw_samples(p.probs, p.n_qubits(), shots, spec);
  s.meta.lambda_claim = p.lambda;
  return s;
}

/// Uniformly random bit-strings (the fully depolarized sampler).
inline SampleSet draw_uniform_samples(int n, std::uint64_t shots, const RngSpec &spec) {
  if (shots < 1)
    throw ArgumentError("shots must be >= 1");
  if (n < 1 || n > 63)
    throw ArgumentError("qubit count must lie in [1, 63]");
  Rng rng(spec);
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  SampleSet s;
  s.n = n;
  s.meta.seed = spec.master_seed;
  s.meta.lambda_claim = 1.0;
  for (std::uint64_t i = 0; i < shots; ++i)
    s.add(rng.next_u64() & mask);
  return s;
}

enum class XebKind { Full, Subsystem, Conditional };

inline std::string_view to_string(XebKind k) {
  switch (k) {
  case XebKind::Full:
    return "full";
  case XebKind::Subsystem:
    return "subsystem";
  case XebKind::Conditional:
    return "conditional";
  }
  return "unknown";
}

struct XebResult {
  double fidelity = 0.0;
  double std_error = 0.0;
  XebKind kind = XebKind::Full;
  int m_eff = 0;               ///< exponent of the 2^m prefactor
  std::uint64_t samples = 0;   ///< shots entering the estimate
};

/// Running moments of the per-shot statistic 2^m p_ideal(x_i).
///
/// Tallies from different circuits (or states) merge in a fixed order, so a
/// pooled estimate is reproducible regardless of how it was computed.
struct XebTally {
  XebKind kind = XebKind::Full;
  int m_eff = 0;
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  /// Adds `c` shots that all share the statistic `value`.
  void add(double value, std::uint64_t c) {
    if (c == 0)
      return;
    const auto n_a = static_cast<double>(count);
    const auto n_b = static_cast<double>(c);
    const double n = n_a + n_b;
    const double delta = value - mean;
    mean += delta * n_b / n;
    m2 += delta * delta * n_a * n_b / n;
    count += c;
  }

  void merge(const XebTally &other) {
    if (other.count == 0)
      return;
    if (count == 0) {
      *this = other;
      return;
    }
    if (other.kind != kind || other.m_eff != m_eff)
      throw ArgumentError("cannot merge XEB tallies of different kinds");
    const auto n_a = static_cast<double>(count);
    const auto n_b = static_cast<double>(other.count);
    const double n = n_a + n_b;
    const double delta = other.mean - mean;
    mean += delta * n_b / n;
    m2 += other.m2 + delta * delta * n_a * n_b / n;
    count += other.count;
  }

  XebResult result() const {
    XebResult r;
    r.kind = kind;
    r.m_eff = m_eff;
    r.samples = count;
    r.fidelity = mean - 1.0;
    r.std_error = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) /
                                  std::sqrt(static_cast<double>(count))
                            : 0.0;
    return r;
  }
};

namespace detail {

inline void check_samples(const SampleSet &samples, std::size_t dimension) {
  if (samples.n < 1 || (std::size_t{1} << samples.n) != dimension)
    throw ArgumentError("sample set over " + std::to_string(samples.n) +
                        " qubits does not match an ideal vector of length " +
                        std::to_string(dimension));
}

} // namespace detail

inline XebTally tally_full(const SampleSet &samples, const ProbVector &ideal) {
  detail::check_samples(samples, ideal.dimension());
  XebTally t{XebKind::Full, samples.n};
  const auto dim = static_cast<double>(ideal.dimension());
  for (const auto &[j, c] : samples.counts)
    t.add(dim * ideal.probs[j], c);
  return t;
}

inline XebTally tally_subsystem(const SampleSet &samples, const ProbVector &ideal,
                                const Partition &part) {
  detail::check_samples(samples, ideal.dimension());
  const auto marginal = marginalize(ideal, part);
  XebTally t{XebKind::Subsystem, part.m()};
  const auto dim = static_cast<double>(part.M());
  for (const auto &[j, c] : samples.counts)
    t.add(dim * marginal[part.a_index(j)], c);
  return t;
}

/// Tally over the shots whose B-substring equals b; may be empty.
inline XebTally tally_conditional(const SampleSet &samples, const ProbVector &ideal,
                                  const Partition &part, std::uint64_t b) {
  detail::check_samples(samples, ideal.dimension());
  const auto slice = conditional_slice(ideal, part, b);
  XebTally t{XebKind::Conditional, part.m()};
  const auto dim = static_cast<double>(part.M());
  for (const auto &[j, c] : samples.counts)
    if (part.b_index(j) == b)
      t.add(dim * slice.cond_probs[part.a_index(j)], c);
  return t;
}

/// Linear XEB 2^n <p_ideal(x_i)> - 1.
inline XebResult xeb_full(const SampleSet &samples, const ProbVector &ideal) {
  return tally_full(samples, ideal).result();
}

/// Subsystem XEB 2^m <p_A(y_i)> - 1 with p_A the ideal marginal.
inline XebResult xeb_subsystem(const SampleSet &samples, const ProbVector &ideal,
                               const Partition &part) {
  return tally_subsystem(samples, ideal, part).result();
}

/// Minimum post-selected shots before a conditional XEB is reported.
inline constexpr std::uint64_t kDefaultMinPostSelected = 10;

/// Conditional XEB 2^m <p_ideal(y_i|b)> - 1 over the shots post-selected on
/// B = b.
inline XebResult xeb_conditional(const SampleSet &samples, const ProbVector &ideal,
                                 const Partition &part, std::uint64_t b,
                                 std::uint64_t min_post_selected = kDefaultMinPostSelected) {
  const auto t = tally_conditional(samples, ideal, part, b);
  if (t.count < min_post_selected)
    throw InsufficientSamplesError(t.count, min_post_selected);
  return t.result();
}

/// Conditional XEB for every b at once.
struct ConditionalXebBreakdown {
  std::vector<std::uint64_t> yields;          ///< post-selected shots per b
  std::vector<std::optional<XebResult>> per_b; ///< empty where yield < minimum
  double weighted_fidelity = 0.0; ///< yield-weighted mean over reported b
  std::uint64_t reported_yield = 0;
};

inline ConditionalXebBreakdown
xeb_conditional_breakdown(const SampleSet &samples, const ProbVector &ideal,
                          const Partition &part,
                          std::uint64_t min_post_selected = kDefaultMinPostSelected) {
  detail::check_samples(samples, ideal.dimension());
  const std::size_t K = part.K();
  ConditionalXebBreakdown out;
  out.yields.assign(K, 0);
  out.per_b.resize(K);
  for (const auto &[j, c] : samples.counts)
    out.yields[part.b_index(j)] += c;
  double weighted = 0.0;
  for (std::size_t b = 0; b < K; ++b) {
    if (out.yields[b] < min_post_selected || out.yields[b] == 0)
      continue;
    out.per_b[b] = tally_conditional(samples, ideal, part, b).result();
    weighted += static_cast<double>(out.yields[b]) * out.per_b[b]->fidelity;
    out.reported_yield += out.yields[b];
  }
  if (out.reported_yield > 0)
    out.weighted_fidelity = weighted / static_cast<double>(out.reported_yield);
  return out;
}

/// Empirical frequencies counts / total as a probability vector.
inline ProbVector empirical_probabilities(const SampleSet &samples) {
  if (samples.total == 0)
    throw ArgumentError("empty sample set");
  if (samples.n < 1 || samples.n > kMaxDirichletQubits)
    throw CapacityError("sample set too wide for a dense frequency vector");
  ProbVector p{samples.n, std::vector<double>(std::size_t{1} << samples.n, 0.0)};
  const auto inv = 1.0 / static_cast<double>(samples.total);
  for (const auto &[j, c] : samples.counts)
    p.probs[j] = static_cast<double>(c) * inv;
  return p;
}

} // namespace rqs
