#pragma once

// Deterministic random numbers.  The mt19937_64 engine is fully specified by
// the standard; the distributions are not, so the uniform/normal transforms
// are written out here to keep streams bit-identical across toolchains.

#include "adqc/common.hpp"

#include <cstdint>
#include <random>

namespace adqc {

// SplitMix64 step, used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // Independent child stream; safe to hand to parallel tasks by id.
  Rng stream(std::uint64_t id) const {
    std::uint64_t s = seed_ ^ (id * 0xd1342543de82ef95ULL + 0x9e3779b97f4a7c15ULL);
    std::uint64_t mixed = splitmix64(s);
    mixed ^= splitmix64(s);
    return Rng(mixed);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (deterministic, unlike
  // std::normal_distribution).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace adqc
