#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rwpattern {

// splitmix64; used to spread user seeds into independent per-stream seeds so
// that parallel workers (trees, documents) draw from disjoint streams.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t s = seed + 0x632be59bd9b4e019ull * (stream + 1);
  return splitmix64(s);
}

/// Deterministic random source. std::mt19937_64 is fully specified by the
/// standard; the distribution helpers below are hand-rolled because the
/// standard library distributions are implementation-defined and would break
/// byte-identical artifacts across toolchains.
class Rand {
 public:
  explicit Rand(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double strictly inside (lo, hi). Requires lo < hi.
  double open_range(double lo, double hi) {
    for (;;) {
      double t = lo + (hi - lo) * unit();
      if (t > lo && t < hi) return t;
    }
  }

  /// Uniform integer in [0, n). Requires n > 0. Rejection sampling keeps the
  /// draw unbiased and portable.
  uint64_t below(uint64_t n) {
    uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    for (;;) {
      uint64_t x = engine_();
      if (x < limit) return x % n;
    }
  }

  /// First k entries of a Fisher-Yates shuffle of `items` (in place); the
  /// prefix [0, k) is the drawn sample, order = draw order.
  template <typename T>
  void partial_shuffle(std::vector<T>& items, size_t k) {
    size_t n = items.size();
    for (size_t i = 0; i < k && i + 1 < n; ++i) {
      size_t j = i + static_cast<size_t>(below(n - i));
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rwpattern
