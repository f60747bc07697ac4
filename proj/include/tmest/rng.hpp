#ifndef TMEST_RNG_HPP
#define TMEST_RNG_HPP

#include <cstdint>
#include <limits>

namespace tmest {

/// Counter-based 64-bit generator: the k-th output is the SplitMix64
/// finalizer applied to seed + k * golden-gamma. Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw on (0, 1]; never returns 0 so logs and inverse powers
  /// stay finite.
  double uniform_open_closed() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace tmest

#endif  // TMEST_RNG_HPP
