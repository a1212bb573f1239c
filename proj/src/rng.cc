#include "iccc/rng.h"

#include <limits>
#include <stdexcept>

namespace iccc {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  // Length terminator keeps ("ab", "c") and ("a", "bc") apart.
  for (int i = 0; i < 8; ++i) {
    h ^= (bytes.size() >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t Rng::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::uniform: empty range");
  const std::uint64_t range = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      (std::numeric_limits<std::uint64_t>::max() % range + 1) % range;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return static_cast<std::size_t>(x % range);
}

double Rng::canonical() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) { return canonical() < p; }

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view scope,
                          std::string_view key, std::uint64_t index) {
  std::uint64_t h = splitmix64(global_seed ^ kFnvOffset);
  h = fnv1a(h, scope);
  h = fnv1a(h, key);
  return splitmix64(h ^ splitmix64(index));
}

}  // namespace iccc
