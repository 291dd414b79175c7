#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>

namespace poisonbench {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/**
 * Counter-based random stream.
 *
 * The n-th draw is a pure function of (key, n), so a stream can be split
 * into named children without touching the parent's sequence. Every
 * sampling routine here is written out explicitly (no std distributions)
 * so draws are bit-identical across standard libraries.
 *
 * Satisfies std::uniform_random_bit_generator.
 */
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr RandomStream(std::uint64_t key = 0) noexcept : key_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  /// Independent child stream keyed by name; the parent is not advanced.
  [[nodiscard]] RandomStream split(std::string_view name) const noexcept {
    return RandomStream(mix64(key_ ^ fnv1a64(name)), Raw{});
  }
  [[nodiscard]] RandomStream split(std::uint64_t index) const noexcept {
    return RandomStream(mix64(key_ + mix64(index + 0x9e3779b97f4a7c15ULL)), Raw{});
  }

  result_type operator()() noexcept { return next_u64(); }

  result_type next_u64() noexcept { return mix64(key_ + mix64(++counter_)); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), Lemire's multiply-shift with rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: empty range");
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Unit-rate exponential variate.
  double exponential() noexcept { return -std::log(uniform_open()); }

  /// Index drawn from an unnormalized-safe probability vector (assumed to sum to ~1).
  int categorical(std::span<const double> probs) noexcept {
    const double u = uniform();
    double acc = 0.0;
    int last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last_positive = static_cast<int>(i);
      if (u < acc) return last_positive;
    }
    return last_positive;
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  struct Raw {};
  constexpr RandomStream(std::uint64_t key, Raw) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace poisonbench
