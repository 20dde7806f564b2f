#pragma once

#include <cmath>
#include <cstdint>

namespace sloc {

// Counter-style deterministic generator. Output i of a stream with key k is
// mix64(k + i*GOLDEN) (the splitmix64 walk), so a stream is a pure function of
// (key, counter) and never shares state. Streams are split per (purpose tag,
// index), which is how estimators and path simulators derive independent
// substreams that are reproducible for any worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix64(seed ^ kKeyTweak)) {}

  // Child stream for (tag, index); pure function of the parent key.
  RngStream split(std::uint64_t tag, std::uint64_t index = 0) const {
    RngStream child(0);
    child.key_ = mix64(mix64(key_ + kGolden * (tag + 1)) + kGolden * (index + 1));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe under log().
  double uniform_open() { return 1.0 - uniform01(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; consumes exactly two outputs per call.
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double theta = 2.0 * kPi * uniform01();
    return r * std::cos(theta);
  }

  double exponential() { return -std::log(uniform_open()); }

  // Integer in [0, bound) by 128-bit multiply-shift reduction.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kKeyTweak = 0x5851f42d4c957f2dULL;
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sloc
