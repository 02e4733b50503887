#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ackofdm/rng.hpp"

namespace ackofdm {

enum class PhiBuildMethod {
  kLogDomainConvolution,  // deterministic numerical convolution (default)
  kMonteCarlo,            // empirical CDF; cross-check path used in tests
};

// Tabulated CDF of X = prod_{d=1..D} h_d where the h_d are i.i.d. unit-mean
// exponential channel power gains. The grid is log-spaced in x with the
// quantile q at each point; cdf/inv_cdf interpolate piecewise-linearly in
// (x, q), which preserves monotonicity exactly.
struct PhiTable {
  int subband_count = 1;
  std::vector<double> x;  // strictly increasing, > 0
  std::vector<double> q;  // non-decreasing, q.front() <= 1e-6, q.back() = 1
  PhiBuildMethod method = PhiBuildMethod::kLogDomainConvolution;
  int resolution = 0;  // log-grid size (convolution) or sample count (MC)
};

// Builds the table for D subbands. For D = 1 the exponential CDF is tabulated
// directly; for D > 1 the density of log h (e^{s - e^s}) is convolved D-1
// times on a uniform lattice spanning [-40, 15] nats and integrated. The
// Monte Carlo method bins `resolution` sampled products on the same lattice
// and is deterministic given `seed`.
PhiTable build_phi(int subband_count, int resolution,
                   PhiBuildMethod method = PhiBuildMethod::kLogDomainConvolution,
                   std::uint64_t seed = 1);

// CDF value at x >= 0; +infinity maps to exactly 1.
double cdf(const PhiTable& table, double x);

// Quantile function: smallest interpolated x with cdf(x) >= prob.
// inv_cdf(0) = 0 and inv_cdf(1) = +infinity (the upper sentinel); probabilities
// above the last grid quantile clamp to the largest grid x.
double inv_cdf(const PhiTable& table, double prob);

// One draw of the product of D independent unit-mean exponentials.
double sample_product(int subband_count, Rng& rng);

// Cache round-trip: hexfloat text dump keyed by (D, resolution, method),
// bit-exact on reload.
void save_phi_table(const PhiTable& table, const std::string& path);
PhiTable load_phi_table(const std::string& path);

const char* to_string(PhiBuildMethod method);

}  // namespace ackofdm
