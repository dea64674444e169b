#ifndef TSC_RANDOM_HPP_
#define TSC_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tsc {

// Seeded pseudo-random stream with platform-independent derived draws.
//
// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not, so every derived variate here is computed by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n).
  std::size_t index(std::size_t n);

  // Poisson(mean) by CDF inversion; consumes exactly one uniform.
  int poisson(double mean);

  // Standard normal via Box-Muller; consumes two uniforms.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 mix of (seed, stream); gives independent seeds for sub-streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tsc

#endif  // TSC_RANDOM_HPP_
