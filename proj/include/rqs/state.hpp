#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rqs/errors.hpp"
#include "rqs/numeric.hpp"
#include "rqs/rng.hpp"

namespace rqs {

/// Largest qubit count accepted by sample_haar_state (2^24 complex doubles).
inline constexpr int kDefaultMaxQubits = 24;
/// Largest dimension exponent accepted by sample_flat_dirichlet.
inline constexpr int kMaxDirichletQubits = 28;

/// Pure n-qubit state; amplitudes are indexed with qubit 0 as the most
/// significant bit.
struct StateVector {
  int n_qubits = 0;
  std::vector<std::complex<double>> amplitudes;

  std::size_t dimension() const noexcept { return amplitudes.size(); }
};

/// Normalized bit-string probability vector of length 2^n_qubits.
struct ProbVector {
  int n_qubits = 0;
  std::vector<double> probs;

  std::size_t dimension() const noexcept { return probs.size(); }
  double operator[](std::size_t i) const noexcept { return probs[i]; }
};

/// A probability vector after global depolarization of strength lambda:
/// probs[i] == (1 - lambda) * base[i] + lambda / N.
struct DepolarizedProbVector {
  ProbVector base;
  double lambda = 0.0;
  std::vector<double> probs;

  int n_qubits() const noexcept { return base.n_qubits; }
  std::size_t dimension() const noexcept { return probs.size(); }

  /// The depolarized probabilities viewed as an ordinary ProbVector.
  ProbVector as_prob_vector() const { return {base.n_qubits, probs}; }
};

namespace detail {

inline void check_qubits(int n, int n_max) {
  if (n < 1 || n > n_max)
    throw CapacityError("qubit count " + std::to_string(n) +
                        " outside [1, " + std::to_string(n_max) + "]");
}

} // namespace detail

/// Haar-random pure state: i.i.d. complex normals with E|z|^2 = 1,
/// normalized to unit length.
inline StateVector sample_haar_state(int n, const RngSpec &spec,
                                     int n_max = kDefaultMaxQubits) {
  detail::check_qubits(n, n_max);
  const std::size_t dim = std::size_t{1} << n;
  Rng rng(spec);
  const double sd = std::sqrt(0.5);
  StateVector state{n, std::vector<std::complex<double>>(dim)};
  std::vector<double> weights(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double re = sd * rng.normal();
    const double im = sd * rng.normal();
    state.amplitudes[i] = {re, im};
    weights[i] = re * re + im * im;
  }
  const double scale = 1.0 / std::sqrt(total(weights));
  for (auto &c : state.amplitudes)
    c *= scale;
  return state;
}

/// Bit-string probabilities |c_i|^2.
inline ProbVector probabilities(const StateVector &state) {
  ProbVector p{state.n_qubits, std::vector<double>(state.dimension())};
  for (std::size_t i = 0; i < state.dimension(); ++i)
    p.probs[i] = std::norm(state.amplitudes[i]);
  return p;
}

/// Direct draw from the flat Dirichlet law on N = 2^n outcomes, built from
/// N standard exponentials. Statistically identical to
/// probabilities(sample_haar_state(n)) without the complex array.
inline ProbVector sample_flat_dirichlet(std::uint64_t dimension,
                                       const RngSpec &spec) {
  if (dimension < 2 || !std::has_single_bit(dimension))
    throw ArgumentError("Dirichlet dimension " + std::to_string(dimension) +
                        " is not a power of two >= 2");
  const int n = std::countr_zero(dimension);
  detail::check_qubits(n, kMaxDirichletQubits);
  Rng rng(spec);
  ProbVector p{n, std::vector<double>(dimension)};
  for (auto &x : p.probs)
    x = rng.exponential();
  const double inv = 1.0 / total(p.probs);
  for (auto &x : p.probs)
    x *= inv;
  return p;
}

/// Global depolarization as the affine map p -> (1 - lambda) p + lambda / N.
inline DepolarizedProbVector depolarize(const ProbVector &p, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ArgumentError("depolarizing strength must lie in [0, 1]");
  const double floor = lambda / static_cast<double>(p.dimension());
  const double keep = 1.0 - lambda;
  DepolarizedProbVector out{p, lambda, std::vector<double>(p.dimension())};
  for (std::size_t i = 0; i < p.dimension(); ++i)
    out.probs[i] = keep * p.probs[i] + floor;
  return out;
}

/// Multiplies every component by `factor` (typically the dimension),
/// producing the scaled variable x = D p.
inline std::vector<double> scaled(std::span<const double> probs, double factor) {
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out[i] = factor * probs[i];
  return out;
}

} // namespace rqs
