#pragma once

#include <cstdint>
#include <limits>

namespace rdhp {

/// Counter-based generator ("SplitMix64-CTR").
///
/// Output n of stream (seed, stream) is mix64(key + (n + 1) * 0x9E3779B97F4A7C15)
/// with key = mix64(seed ^ mix64(stream + 0xD1B54A32D192ED03)) and mix64 the
/// SplitMix64 finalizer. Because every draw is a pure function of
/// (key, counter), sub-streams can be derived per sequence or per task and
/// results do not depend on scheduling. Doubles use the top 53 bits.
/// Normals use Box-Muller on two consecutive draws, no caching.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng() : CounterRng(0, 0) {}
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  result_type next();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in (0, 1).
  double uniform_open();
  double exponential(double rate = 1.0);
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream; does not advance this generator.
  CounterRng derive(std::uint64_t stream) const;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }
  static CounterRng from_state(std::uint64_t key, std::uint64_t counter);

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace rdhp
