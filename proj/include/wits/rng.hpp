#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace wits {

// splitmix64 finalizer. The whole project draws randomness through this so
// that results do not depend on the standard library's distribution
// implementations or on thread scheduling.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
  return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

inline uint64_t hash_string(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Derives the key of a named child stream. Streams keyed by stable ids are
// what keeps parallel generation identical to sequential generation.
inline uint64_t stream_key(uint64_t root, std::string_view name, uint64_t a = 0,
                           uint64_t b = 0, uint64_t c = 0) {
  uint64_t k = hash_combine(root, hash_string(name));
  k = hash_combine(k, a);
  k = hash_combine(k, b);
  k = hash_combine(k, c);
  return k;
}

// Counter-based generator: output i is a pure function of (key, i).
class StreamRng {
 public:
  explicit StreamRng(uint64_t key) : state_(key) {}

  uint64_t next() { return splitmix64(state_ += kGamma); }

  // Stateless access, used where elements are generated out of order.
  uint64_t at(uint64_t i) const { return splitmix64(state_ + kGamma * (i + 1)); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n) by Lemire's method with rejection.
  uint64_t bounded(uint64_t n) {
    if (n <= 1) return 0;
    while (true) {
      uint64_t x = next();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      uint64_t lo = static_cast<uint64_t>(m);
      if (lo >= n || lo >= (0ull - n) % n) return static_cast<uint64_t>(m >> 64);
    }
  }

  // Standard normal via Box-Muller; each draw consumes two uniforms.
  double normal() {
    double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ull;
  uint64_t state_;
};

}  // namespace wits
