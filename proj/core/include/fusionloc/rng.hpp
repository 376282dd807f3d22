#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fusionloc {

// Deterministic 64-bit generator (splitmix64). All randomness in the library
// flows through this so results are reproducible across platforms; std::
// distributions are avoided because their algorithms are implementation
// defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, n) by rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 bits of entropy.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_below(i)]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes several values into one seed, so sub-streams (per epoch, per frame,
// per layer) can be derived from a single run seed without correlation.
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  Rng r(a ^ 0x6a09e667f3bcc909ULL);
  std::uint64_t s = r.next_u64();
  s ^= b + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
  Rng r2(s);
  s = r2.next_u64();
  s ^= c + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
  Rng r3(s);
  return r3.next_u64();
}

}  // namespace fusionloc
