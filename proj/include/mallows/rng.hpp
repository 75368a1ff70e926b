#pragma once

// Reproducible random streams.
//
// The generator is xoshiro256** (Blackman & Vigna) seeded through splitmix64.
// Every derived distribution below is implemented here rather than taken from
// <random>, whose distributions are implementation-defined. Given the same
// seed, a run produces the same draws on every conforming platform (modulo
// last-ulp differences in libm's log/exp/cos).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace mallows {

/// splitmix64 step; also used to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the `index`-th child stream of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); safe as a log argument.
  double uniform_open() noexcept {
    double u;
    do u = uniform(); while (u == 0.0);
    return u;
  }

  /// Uniform integer on the closed range [lo, hi], by rejection (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>((*this)());
    const std::uint64_t limit = max() - (max() % range);
    std::uint64_t x;
    do x = (*this)(); while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  /// Standard normal via Box-Muller (one variate per call, no cached state).
  double normal() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the U^{1/shape} boost.
  double gamma(double shape) noexcept {
    if (shape < 1.0) {
      const double u = uniform_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) noexcept {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  /// Poisson(mean) by counting unit-rate exponential arrivals; O(mean).
  std::int64_t poisson(double mean) noexcept {
    std::int64_t k = 0;
    double t = -std::log(uniform_open());
    while (t < mean) {
      ++k;
      t -= std::log(uniform_open());
    }
    return k;
  }

  /// Index drawn with probability proportional to exp(log_weights[i]).
  std::size_t categorical_log(std::span<const double> log_weights) noexcept {
    double top = -std::numeric_limits<double>::infinity();
    for (double w : log_weights) top = std::max(top, w);
    double total = 0.0;
    for (double w : log_weights) total += std::exp(w - top);
    double u = uniform() * total;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
      const double p = std::exp(log_weights[i] - top);
      if (u < p && p > 0.0) return i;
      u -= p;
    }
    // Rounding fell off the end: return the last index with positive mass.
    for (std::size_t i = log_weights.size(); i-- > 0;)
      if (std::exp(log_weights[i] - top) > 0.0) return i;
    return 0;
  }

  template <class T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

/// Dirichlet draw with per-component concentrations.
inline std::vector<double> dirichlet(Rng& rng, std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t g = 0; g < out.size(); ++g) {
    out[g] = rng.gamma(concentration[g]);
    total += out[g];
  }
  for (double& x : out) x /= total;
  return out;
}

}  // namespace mallows
