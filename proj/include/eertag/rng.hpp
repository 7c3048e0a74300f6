#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace eertag {

// Splitmix64 step, used to derive independent substream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic random source shared by every component that samples.
//
// The engine is std::mt19937_64, whose state transition is fixed by the
// standard. Distributions are hand-rolled here (the standard leaves library
// distributions unspecified), so a given seed yields the same draw sequence
// on every platform:
//   next_u64()     one raw engine output
//   next_double()  (next_u64() >> 11) * 2^-53, in [0, 1)
//   next_below(n)  rejection sampling on next_u64(), then modulo
//   bernoulli(p)   next_double() < p, one draw
//   shuffle(v)     Fisher-Yates: for i = n-1 .. 1, j = next_below(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_below(std::uint64_t n) {
    // Reject the top partial block of 2^64 to avoid modulo bias.
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t x = next_u64();
      if (rem == 0 || x <= max - rem) return x % n;
    }
  }

  bool bernoulli(double p) { return next_double() < p; }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Engine state as text; mt19937_64 stream output is portable.
  std::string state() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
  }

  void restore(const std::string& state_text) {
    std::istringstream in(state_text);
    in >> engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace eertag
