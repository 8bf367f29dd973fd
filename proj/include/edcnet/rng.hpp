#ifndef EDCNET_RNG_HPP
#define EDCNET_RNG_HPP

#include <cstdint>
#include <cstddef>

namespace edcnet {

// SplitMix64. Tiny, fast, and gives identical streams on every platform,
// which std::uniform_real_distribution does not guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // modulo bias is < 2^-53 for any n we ever use; acceptable
    return next_u64() % n;
  }

  int sign() { return (next_u64() & 1u) ? 1 : -1; }

 private:
  std::uint64_t state_;
};

// Stable derivation of independent streams from (seed, stream index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  return mix.next_u64();
}

// Seeded Fisher-Yates over an index array.
template <typename Vec>
void shuffle(Vec& v, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    auto tmp = v[i - 1];
    v[i - 1] = v[j];
    v[j] = tmp;
  }
}

}  // namespace edcnet

#endif
