#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mmrisk {

// Derives an independent stream seed from a root seed and a stream name.
// All randomness in the project flows from one root seed through named
// sub-streams so components can be varied independently.
uint64_t mix_seed(uint64_t root, std::string_view stream);
uint64_t mix_seed(uint64_t root, std::string_view stream, uint64_t index);

// Deterministic RNG built on mt19937_64. std::*_distribution is
// implementation-defined, so all draws are derived here from raw 64-bit
// words to keep outputs bit-identical across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  int64_t uniform_int(int64_t lo, int64_t hi);

  // Standard normal via Box-Muller (cached spare).
  double gaussian();

  // Normal truncated to +/- clip standard deviations, scaled by std_dev.
  double truncated_normal(double std_dev, double clip = 2.0);

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mmrisk
