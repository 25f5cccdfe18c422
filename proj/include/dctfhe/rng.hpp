#pragma once

#include <cstdint>

namespace dctfhe {

// splitmix64 finalizer. Fully specified here so streams are bit-identical
// across platforms and compilers, which std::uniform_* does not guarantee.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter). No sequential state, so parallel consumers cannot
// reorder or skip draws.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  uint64_t next_u64(uint64_t counter) const {
    uint64_t h = mix64(seed_ ^ 0x2545f4914f6cdd1dull);
    h = mix64(h ^ stream_);
    return mix64(h ^ counter);
  }

  // uniform in [0, 1) with 53 bits of mantissa
  double uniform(uint64_t counter) const {
    return static_cast<double>(next_u64(counter) >> 11) * 0x1.0p-53;
  }

  // unbiased integer in [0, n) via rejection on the top 64-bit range
  uint64_t below(uint64_t n, uint64_t counter) const {
    const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    uint64_t ctr = counter;
    for (;;) {
      const uint64_t v = next_u64(ctr);
      if (v < limit) return v % n;
      ctr += 0x9e3779b97f4a7c15ull;  // decorrelated retry counter
    }
  }

  CounterRng substream(uint64_t stream) const {
    return CounterRng(seed_, mix64(stream_ ^ mix64(stream)));
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  uint64_t stream_;
};

}  // namespace dctfhe
