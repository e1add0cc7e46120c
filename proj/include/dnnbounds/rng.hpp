#ifndef DNNBOUNDS_RNG_HPP
#define DNNBOUNDS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dnnbounds {

/// Counter-based SplitMix64 stream.
///
/// Output n of a stream with key K is mix(K + n * 0x9E3779B97F4A7C15), where
/// mix is the SplitMix64 finalizer (Steele, Lea, Flood 2014). Streams are
/// addressed by (seed, tag, index), so any sample can be replayed on its own.
/// Normals use Box-Muller on two consecutive uniforms; no std:: distribution
/// is involved, so draws do not depend on the standard library vendor.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for `index` within `tag` under `seed`.
  static CounterRng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return CounterRng(mix(mix(seed ^ mix(tag + kGolden)) + index));
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform on (0, 1].
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dnnbounds

#endif  // DNNBOUNDS_RNG_HPP
