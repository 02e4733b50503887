#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ackofdm/rng.hpp"

namespace ackofdm {

enum class AckModel {
  kIdeal,  // success iff X >= theta implied by (p, r)
  kExact,  // success iff r <= exact mutual information
};

struct SystemConfig {
  int subcarriers = 64;        // N
  int subbands = 3;            // D, independent flat-fading blocks
  int users = 3;               // K
  int packets_per_slot = 30;   // M
  double slot_duration = 0.1;  // T seconds, channel quasi-static over it
  double total_power = 24.0;   // P0, budget across the M packets of a slot
  double target_per = 0.05;    // epsilon
  AckModel ack_model = AckModel::kIdeal;
  double doppler_max = 0.0;    // Hz; > 0 evolves the channel per packet slot
  std::uint64_t seed = 1;

  // NT/(DM), the bits-per-packet scale shared by both rate expressions.
  double rate_scale() const {
    return static_cast<double>(subcarriers) * slot_duration /
           (static_cast<double>(subbands) * packets_per_slot);
  }
  // Reported metadata only; noise power is normalized to one.
  double transmit_snr_db() const;
  void validate() const;  // throws std::invalid_argument
};

// One block-fading draw: per-user complex subband amplitudes, their power
// gains h = |g|^2 (unit-mean exponential), and the per-user products X_k.
struct ChannelRealization {
  int users = 0;
  int subbands = 0;
  std::vector<std::complex<double>> amplitudes;  // row-major users x subbands
  std::vector<double> power_gains;
  std::vector<double> products;

  std::span<const double> gains_for(int user) const {
    return {power_gains.data() + static_cast<std::size_t>(user) * subbands,
            static_cast<std::size_t>(subbands)};
  }
};

ChannelRealization draw_channel(const SystemConfig& cfg, Rng& rng);

// Exact mutual information, bits per packet slot:
//   (NT/DM) sum_d log2(1 + p h_d / N)
double capacity_exact(double power, std::span<const double> gains,
                      const SystemConfig& cfg);

// High-SNR surrogate driven by the scalar product X:
//   (NT/DM) (D log2(p/N) + log2 X); may be negative, callers clamp.
double capacity_highsnr(double power, double product, const SystemConfig& cfg);

// Power threshold on X implied by a (power, rate) pair:
//   theta = (N/p)^D 2^{r D M / (N T)}
double implied_threshold(double rate, double power, const SystemConfig& cfg);

// 1-bit decode feedback for one user. Equality counts as success.
int ack_outcome(AckModel model, double rate, double power,
                const ChannelRealization& realization, int user,
                const SystemConfig& cfg);

// First-order Gauss-Markov update over one packet slot with correlation
// rho = J0(2 pi f_d T / M) per user; f_d = 0 leaves that user untouched and
// consumes no randomness.
ChannelRealization evolve_doppler(const ChannelRealization& realization,
                                  std::span<const double> doppler_hz,
                                  const SystemConfig& cfg, Rng& rng);
ChannelRealization evolve_doppler(const ChannelRealization& realization,
                                  double doppler_hz, const SystemConfig& cfg,
                                  Rng& rng);

}  // namespace ackofdm
