#pragma once

/* Deterministic RNG with hashed per-chain stream derivation. xoshiro256**
 * core, splitmix64 seeding, and hand-rolled uniform/normal transforms so the
 * byte stream is identical across platforms and standard libraries (the
 * checkpoint format stores the four state words verbatim). */

#include <array>
#include <cmath>
#include <cstdint>

namespace qcr {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// stream derivation: chain c gets hash(seed, c)
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t chain) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (chain + 1));
  std::uint64_t h = splitmix64(x);
  return h ^ splitmix64(x);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
    have_normal_ = false;
    cached_normal_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0, 1) with 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via polar rejection (deterministic given the stream)
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return cached_normal_;
    }
    double u, v, r2;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    cached_normal_ = v * f;
    have_normal_ = true;
    return u * f;
  }

  // state access for checkpointing; normal cache excluded by design, so a
  // saved state resumes at a normal-pair boundary
  std::array<std::uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<std::uint64_t, 4>& s) {
    s_ = s;
    have_normal_ = false;
    cached_normal_ = 0.0;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
  bool have_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace qcr
