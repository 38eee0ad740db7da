#pragma once

#include <cstdint>

namespace cvt {

// Counter-based splitmix64 stream. Copyable, comparable, trivially
// serializable -- the whole stream state is one word.
struct Rng {
  std::uint64_t state = 0;

  explicit Rng(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform over {0,...,n-1}
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  int sign() { return (next() & 1) ? 1 : -1; }

  bool operator==(const Rng&) const = default;
};

// Derives an independent stream for worker `id` from a master seed.
inline Rng derive_stream(std::uint64_t master_seed, std::uint64_t id) {
  Rng mix(master_seed ^ (0xd1b54a32d192ed03ULL * (id + 1)));
  return Rng(mix.next());
}

}  // namespace cvt
