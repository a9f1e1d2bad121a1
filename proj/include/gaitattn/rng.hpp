#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gaitattn {

// Deterministic random source. The engine is std::mt19937_64 (its output
// sequence is pinned by the standard); the distributions are hand-rolled so
// that identical seeds give identical streams on every platform, which the
// reproducibility contract of the whole pipeline rests on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t bounded(std::uint64_t n) { return gen_() % n; }

  // Standard normal via the Marsaglia polar method (no libm trig involved).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Seed derivation offsets from a master seed. One integer reproduces an
// entire experiment; each pipeline stage draws from its own stream.
namespace seed_offset {
inline constexpr std::uint64_t kData = 0;
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kInit = 2;
inline constexpr std::uint64_t kTrain = 3;
inline constexpr std::uint64_t kBootstrap = 4;
}  // namespace seed_offset

}  // namespace gaitattn
