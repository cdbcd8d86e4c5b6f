#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rqs/errors.hpp"
#include "rqs/state.hpp"

namespace rqs {

/// Split of n qubits into a measured subsystem A and its complement B.
///
/// Bit convention: in a full index j, qubit q is bit (n - 1 - q), so qubit 0
/// is the most significant bit. The A-index y packs the A qubits in
/// `a_bits` order (first listed = most significant); the B-index z packs the
/// remaining qubits in ascending order. With the default partition A is the
/// leading m qubits and B the trailing k, so j = y K + z.
class Partition {
public:
  Partition() = default;

  Partition(int n, std::vector<int> a_bits) : n_(n), a_bits_(std::move(a_bits)) {
    if (n_ < 1 || n_ > 63)
      throw ArgumentError("partition qubit count must lie in [1, 63]");
    std::vector<bool> used(static_cast<std::size_t>(n_), false);
    for (int q : a_bits_) {
      if (q < 0 || q >= n_)
        throw ArgumentError("subsystem qubit " + std::to_string(q) +
                            " outside [0, " + std::to_string(n_) + ")");
      if (used[static_cast<std::size_t>(q)])
        throw ArgumentError("subsystem qubit " + std::to_string(q) + " repeated");
      used[static_cast<std::size_t>(q)] = true;
    }
    if (a_bits_.empty())
      throw ArgumentError("subsystem A must contain at least one qubit");
    for (int q = 0; q < n_; ++q)
      if (!used[static_cast<std::size_t>(q)])
        b_bits_.push_back(q);
    contiguous_ = true;
    for (std::size_t i = 0; i < a_bits_.size(); ++i)
      contiguous_ = contiguous_ && a_bits_[i] == static_cast<int>(i);
  }

  /// A = qubits [0, m), B = the trailing n - m qubits.
  static Partition leading(int n, int m) {
    if (m < 1 || m > n)
      throw ArgumentError("subsystem size must lie in [1, n]");
    std::vector<int> bits(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      bits[static_cast<std::size_t>(i)] = i;
    return Partition(n, std::move(bits));
  }

  int n() const noexcept { return n_; }
  int m() const noexcept { return static_cast<int>(a_bits_.size()); }
  int k() const noexcept { return n_ - m(); }
  std::uint64_t N() const noexcept { return std::uint64_t{1} << n_; }
  std::uint64_t M() const noexcept { return std::uint64_t{1} << m(); }
  std::uint64_t K() const noexcept { return std::uint64_t{1} << k(); }
  const std::vector<int> &a_bits() const noexcept { return a_bits_; }
  const std::vector<int> &b_bits() const noexcept { return b_bits_; }
  /// True when A is the leading m qubits in natural order.
  bool contiguous() const noexcept { return contiguous_; }

  std::uint64_t a_index(std::uint64_t j) const noexcept {
    if (contiguous_)
      return j >> k();
    return gather(j, a_bits_);
  }

  std::uint64_t b_index(std::uint64_t j) const noexcept {
    if (contiguous_)
      return j & (K() - 1);
    return gather(j, b_bits_);
  }

  std::uint64_t full_index(std::uint64_t y, std::uint64_t z) const noexcept {
    if (contiguous_)
      return (y << k()) | z;
    return scatter(y, a_bits_) | scatter(z, b_bits_);
  }

  friend bool operator==(const Partition &a, const Partition &b) {
    return a.n_ == b.n_ && a.a_bits_ == b.a_bits_;
  }

private:
  std::uint64_t gather(std::uint64_t j, const std::vector<int> &bits) const noexcept {
    std::uint64_t out = 0;
    for (int q : bits)
      out = (out << 1) | ((j >> (n_ - 1 - q)) & 1u);
    return out;
  }

  std::uint64_t scatter(std::uint64_t v, const std::vector<int> &bits) const noexcept {
    std::uint64_t out = 0;
    const auto len = bits.size();
    for (std::size_t i = 0; i < len; ++i) {
      const std::uint64_t bit = (v >> (len - 1 - i)) & 1u;
      out |= bit << (n_ - 1 - bits[i]);
    }
    return out;
  }

  int n_ = 0;
  std::vector<int> a_bits_;
  std::vector<int> b_bits_;
  bool contiguous_ = false;
};

/// Distribution of subsystem A given that subsystem B was observed as b.
struct ConditionalSlice {
  Partition partition;
  std::uint64_t b = 0;
  std::vector<double> cond_probs; ///< p(y|b), length M
  double weight = 0.0;            ///< p(b)
};

/// p(b) below this is treated as a measure-zero outcome.
inline constexpr double kDegenerateSliceThreshold = 1e-300;

namespace detail {

inline void check_partition(std::size_t dimension, const Partition &part) {
  if (part.n() < 1 || part.N() != dimension)
    throw ArgumentError("partition over " + std::to_string(part.n()) +
                        " qubits does not match a vector of length " +
                        std::to_string(dimension));
}

} // namespace detail

/// Marginal p_A(y) = sum_z p(y, z).
inline std::vector<double> marginalize(std::span<const double> probs,
                                       const Partition &part) {
  detail::check_partition(probs.size(), part);
  const std::size_t M = part.M();
  const std::size_t K = part.K();
  std::vector<double> out(M, 0.0);
  if (part.contiguous()) {
    for (std::size_t y = 0; y < M; ++y)
      out[y] = total(probs.subspan(y * K, K));
    return out;
  }
  for (std::size_t j = 0; j < probs.size(); ++j)
    out[part.a_index(j)] += probs[j];
  return out;
}

inline std::vector<double> marginalize(const ProbVector &p, const Partition &part) {
  return marginalize(std::span<const double>(p.probs), part);
}

/// Marginal of a depolarized vector, evaluated as the affine image
/// (1 - lambda) p_A + lambda / M of the noiseless marginal. Equal to summing
/// the depolarized components, and keeps every value >= lambda / M exactly.
inline std::vector<double> marginalize(const DepolarizedProbVector &p,
                                       const Partition &part) {
  auto out = marginalize(p.base, part);
  const double floor = p.lambda / static_cast<double>(part.M());
  const double keep = 1.0 - p.lambda;
  for (auto &v : out)
    v = keep * v + floor;
  return out;
}

/// Conditional distribution p(y|b) = p(y, b) / p(b).
inline ConditionalSlice conditional_slice(std::span<const double> probs,
                                          const Partition &part, std::uint64_t b) {
  detail::check_partition(probs.size(), part);
  if (b >= part.K())
    throw ArgumentError("condition b = " + std::to_string(b) + " outside [0, " +
                        std::to_string(part.K()) + ")");
  const std::size_t M = part.M();
  ConditionalSlice slice{part, b, std::vector<double>(M), 0.0};
  for (std::size_t y = 0; y < M; ++y)
    slice.cond_probs[y] = probs[part.full_index(y, b)];
  slice.weight = total(slice.cond_probs);
  if (!(slice.weight >= kDegenerateSliceThreshold))
    throw DegenerateSliceError("p(b = " + std::to_string(b) +
                               ") is zero; cannot condition on it");
  const double inv = 1.0 / slice.weight;
  for (auto &v : slice.cond_probs)
    v *= inv;
  return slice;
}

inline ConditionalSlice conditional_slice(const ProbVector &p, const Partition &part,
                                          std::uint64_t b) {
  return conditional_slice(std::span<const double>(p.probs), part, b);
}

/// Exact conditioning of a depolarized vector (no typicality approximation).
inline ConditionalSlice noisy_conditional_exact(const DepolarizedProbVector &p,
                                                const Partition &part,
                                                std::uint64_t b) {
  return conditional_slice(std::span<const double>(p.probs), part, b);
}

/// Approximate noisy conditional law (1 - lambda) p(y|b) + lambda / M,
/// obtained by replacing p(b) with its mean M / N.
inline std::vector<double> noisy_conditional_affine(const ConditionalSlice &ideal,
                                                    double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ArgumentError("depolarizing strength must lie in [0, 1]");
  const double floor = lambda / static_cast<double>(ideal.cond_probs.size());
  const double keep = 1.0 - lambda;
  std::vector<double> out(ideal.cond_probs.size());
  for (std::size_t y = 0; y < out.size(); ++y)
    out[y] = keep * ideal.cond_probs[y] + floor;
  return out;
}

/// Mean absolute deviation between two equally long vectors.
inline double mean_abs_deviation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw ArgumentError("mean_abs_deviation needs equal, nonempty inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

} // namespace rqs
