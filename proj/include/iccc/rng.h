// Seeded random source with platform-stable draws.
//
// The standard distributions are implementation-defined, so uniform integers
// and Bernoulli trials are derived here directly from the 64-bit engine output.
// Every caption gets its own substream keyed by (global seed, caption key,
// sample index), which makes construction independent of scheduling.

#ifndef ICCC_RNG_H_
#define ICCC_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace iccc {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform(std::size_t n);

  // Uniform double in [0, 1) with 53 bits of precision.
  double canonical();

  // Always consumes exactly one draw, even for p outside (0, 1).
  bool bernoulli(double p);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stable 64-bit seed for a named substream.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view scope,
                          std::string_view key, std::uint64_t index = 0);

}  // namespace iccc

#endif  // ICCC_RNG_H_
