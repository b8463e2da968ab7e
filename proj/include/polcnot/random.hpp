#pragma once
// Counter-based random streams. A value is a pure function of
// (seed, stream, counter), so blocks of samples can be generated in any order
// or on any thread and still reproduce the sequential result bit for bit.

#include <cstdint>

namespace polcnot {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// SplitMix64 keyed by (seed, stream). next() advances an internal counter;
/// at(counter) gives random access to the same sequence.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(seed ^ detail::mix64(stream + detail::kGoldenGamma))) {}

  constexpr std::uint64_t at(std::uint64_t counter) const {
    return detail::mix64(key_ + (counter + 1) * detail::kGoldenGamma);
  }

  constexpr std::uint64_t next() { return at(counter_++); }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1).
  constexpr double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace polcnot
