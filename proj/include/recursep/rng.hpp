#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace recursep {

// SplitMix64 step. Used both as a stream splitter and as a seed scrambler so
// that derived streams are decorrelated from each other and from the master.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream derivation: the seed for sub-stream `index` of
// `master`. Results are independent of which worker consumes the stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (index * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL);
  return splitmix64(s);
}

// Thin RNG wrapper. The distribution transforms are hand-rolled on top of the
// raw 64-bit stream so that sampled values do not depend on the standard
// library's <random> distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform on [a, b).
  double uniform_range(double a, double b) { return a + (b - a) * uniform(); }

  // Exponential waiting time; rate <= 0 means the event never happens.
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-uniform()) / rate;
  }

  // Integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace recursep
