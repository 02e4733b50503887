#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace ackofdm {

// Deterministic random stream. mt19937_64 output is specified bit-exactly by
// the standard; the distribution transforms below are hand-rolled because the
// standard library distribution objects are implementation-defined and would
// break cross-platform reproducibility of seeded runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent stream for one trial of an experiment. Trials
  // seeded this way can run concurrently without changing results.
  static Rng for_trial(std::uint64_t seed, std::uint64_t trial) {
    return Rng(split_mix(seed ^ split_mix(trial + 0x9E3779B97F4A7C15ull)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [2^-64, 1]; never returns 0 so log() is always finite.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Unit-mean exponential.
  double exponential() { return -std::log(uniform01()); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Circularly-symmetric complex Gaussian with E|g|^2 = 1, so |g|^2 is a
  // unit-mean exponential.
  std::complex<double> complex_gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static std::uint64_t split_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ackofdm
