#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rqs {

/// Identifies one reproducible random stream: a master seed plus a per-trial
/// substream index.
struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// Substream `i` under the same master seed.
  constexpr RngSpec stream(std::uint64_t i) const noexcept {
    return {master_seed, i};
  }

  friend constexpr bool operator==(const RngSpec &, const RngSpec &) = default;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace detail

/// Deterministic generator for one RngSpec.
///
/// The engine is a 64-bit Mersenne twister keyed by a splitmix64 mix of
/// (master_seed, stream_index). Variates are produced by explicit formulas
/// rather than the std:: distributions, whose output differs between
/// standard library implementations.
class Rng {
public:
  explicit Rng(const RngSpec &spec) {
    const std::uint64_t a = detail::splitmix64(spec.master_seed);
    const std::uint64_t b =
        detail::splitmix64(a ^ detail::splitmix64(spec.stream_index + 1));
    engine_.seed(b);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_pos() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal by the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Standard exponential (Gamma(1,1)) by inversion.
  double exponential() { return -std::log(uniform_pos()); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace rqs
