#include "ackofdm/phi_dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ackofdm {

namespace {

constexpr double kLogLow = -40.0;   // Pr(log h < -40) ~ 4e-18
constexpr double kLogHigh = 15.0;   // Pr(log h > 15) ~ e^{-e^15}
constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform lattice i*step for i in [i_min, i_max] covering [-40, 15]. Using a
// lattice through 0 keeps convolution outputs on the same lattice, so no
// regridding is needed between stages.
struct Lattice {
  double step;
  int i_min;
  int i_max;
  int size() const { return i_max - i_min + 1; }
  double at(int idx) const { return (i_min + idx) * step; }
};

Lattice make_lattice(int resolution) {
  Lattice lat;
  lat.step = (kLogHigh - kLogLow) / resolution;
  lat.i_min = -static_cast<int>(std::ceil(-kLogLow / lat.step));
  lat.i_max = static_cast<int>(std::ceil(kLogHigh / lat.step));
  return lat;
}

// Density of log h for h ~ Exp(1): f(s) = exp(s - e^s).
std::vector<double> log_exp_density(const Lattice& lat) {
  std::vector<double> f(lat.size());
  for (int i = 0; i < lat.size(); ++i) {
    const double s = lat.at(i);
    f[i] = std::exp(s - std::exp(s));
  }
  return f;
}

// density of (S_a + S_b) on the lattice, truncated back to the base window.
// Both factors decay to ~0 well inside the window, so the truncated mass is
// negligible at every stage for the D values in scope.
std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b,
                             const Lattice& lat) {
  const int n = lat.size();
  std::vector<double> out(n, 0.0);
  // Output array index k sits at lattice coordinate i_min + k; the pair of
  // input coordinates summing to it maps to array indices j and k - i_min - j.
  for (int k = 0; k < n; ++k) {
    const int j_lo = std::max(0, k - lat.i_min - (n - 1));
    const int j_hi = std::min(n - 1, k - lat.i_min);
    double acc = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
      acc += a[j] * b[k - lat.i_min - j];
    }
    out[k] = acc * lat.step;
  }
  return out;
}

void validate_invariants(const PhiTable& t) {
  if (t.x.size() < 2 || t.x.size() != t.q.size())
    throw std::runtime_error("phi table: malformed grid");
  for (std::size_t i = 1; i < t.x.size(); ++i) {
    if (!(t.x[i] > t.x[i - 1]))
      throw std::runtime_error("phi table: x grid not strictly increasing");
    if (t.q[i] < t.q[i - 1])
      throw std::runtime_error("phi table: q not monotone");
  }
  if (t.q.front() > 1e-6 || t.q.back() < 1.0 - 1e-6)
    throw std::runtime_error("phi table: tail coverage invariant violated");
}

}  // namespace

PhiTable build_phi(int subband_count, int resolution, PhiBuildMethod method,
                   std::uint64_t seed) {
  if (subband_count < 1)
    throw std::invalid_argument("build_phi: subband_count must be >= 1");
  if (resolution < 64)
    throw std::invalid_argument("build_phi: resolution must be >= 64");

  PhiTable table;
  table.subband_count = subband_count;
  table.method = method;
  table.resolution = resolution;

  // The convolution lattice needs enough points for interpolation accuracy
  // even when a caller asks for a coarse table.
  const Lattice lat = make_lattice(std::max(resolution, 4096));
  const int n = lat.size();
  table.x.resize(n);
  for (int i = 0; i < n; ++i) table.x[i] = std::exp(lat.at(i));
  table.q.assign(n, 0.0);

  if (method == PhiBuildMethod::kMonteCarlo) {
    Rng rng(seed);
    std::vector<std::int64_t> counts(n, 0);
    for (int s = 0; s < resolution; ++s) {
      const double v = std::log(sample_product(subband_count, rng));
      // attribute the sample to the smallest lattice point >= log X, so the
      // cumulative count at i is #{X <= x_i}
      const int idx = static_cast<int>(std::ceil(v / lat.step)) - lat.i_min;
      counts[std::clamp(idx, 0, n - 1)] += 1;
    }
    std::int64_t cum = 0;
    for (int i = 0; i < n; ++i) {
      cum += counts[i];
      table.q[i] = static_cast<double>(cum) / resolution;
    }
    table.q[n - 1] = 1.0;
  } else if (subband_count == 1) {
    // Exact exponential CDF at the grid points.
    for (int i = 0; i < n; ++i) table.q[i] = -std::expm1(-table.x[i]);
  } else {
    std::vector<double> base = log_exp_density(lat);
    std::vector<double> density = base;
    for (int d = 1; d < subband_count; ++d)
      density = convolve(density, base, lat);
    // Trapezoid cumulative; the density vanishes at both window edges so the
    // quadrature is effectively spectral-accurate. Normalize the tiny mass
    // defect so the last quantile is exactly 1.
    double cum = 0.0;
    for (int i = 1; i < n; ++i) {
      cum += 0.5 * lat.step * (density[i - 1] + density[i]);
      table.q[i] = cum;
    }
    const double total = table.q[n - 1];
    if (total <= 0.0) throw std::runtime_error("build_phi: degenerate density");
    for (int i = 0; i < n; ++i)
      table.q[i] = std::min(1.0, table.q[i] / total);
  }

  validate_invariants(table);
  return table;
}

double cdf(const PhiTable& table, double x) {
  if (std::isnan(x) || x < 0.0)
    throw std::invalid_argument("cdf: x must be >= 0");
  if (x == kInf) return 1.0;
  if (x <= 0.0) return 0.0;
  const auto& gx = table.x;
  const auto& gq = table.q;
  if (x >= gx.back()) return gq.back();
  if (x <= gx.front()) return gq.front() * (x / gx.front());
  const auto it = std::upper_bound(gx.begin(), gx.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - gx.begin());
  const double t = (x - gx[i - 1]) / (gx[i] - gx[i - 1]);
  return gq[i - 1] + t * (gq[i] - gq[i - 1]);
}

double inv_cdf(const PhiTable& table, double prob) {
  if (std::isnan(prob) || prob < 0.0 || prob > 1.0)
    throw std::invalid_argument("inv_cdf: prob must be in [0, 1]");
  if (prob == 0.0) return 0.0;
  if (prob == 1.0) return kInf;
  const auto& gx = table.x;
  const auto& gq = table.q;
  if (prob <= gq.front()) {
    return gq.front() > 0.0 ? gx.front() * (prob / gq.front()) : gx.front();
  }
  if (prob >= gq.back()) return gx.back();
  // Bisect to the enclosing segment, then solve the linear interpolant; this
  // is the fixed point the design's 1e-12 probability tolerance asks for.
  const auto it = std::lower_bound(gq.begin(), gq.end(), prob);
  std::size_t i = static_cast<std::size_t>(it - gq.begin());
  if (gq[i] == gq[i - 1]) return gx[i - 1];  // plateau: left edge
  const double t = (prob - gq[i - 1]) / (gq[i] - gq[i - 1]);
  return gx[i - 1] + t * (gx[i] - gx[i - 1]);
}

double sample_product(int subband_count, Rng& rng) {
  if (subband_count < 1)
    throw std::invalid_argument("sample_product: subband_count must be >= 1");
  double product = 1.0;
  for (int d = 0; d < subband_count; ++d) product *= rng.exponential();
  return product;
}

void save_phi_table(const PhiTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_phi_table: cannot open " + path);
  out << "ackofdm-phi-table v1\n";
  out << table.subband_count << ' ' << table.resolution << ' '
      << to_string(table.method) << ' ' << table.x.size() << '\n';
  char buf[128];
  for (std::size_t i = 0; i < table.x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%a %a\n", table.x[i], table.q[i]);
    out << buf;
  }
  if (!out) throw std::runtime_error("save_phi_table: write failed");
}

PhiTable load_phi_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_phi_table: cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (header != "ackofdm-phi-table v1")
    throw std::runtime_error("load_phi_table: bad header in " + path);
  PhiTable table;
  std::string method;
  std::size_t count = 0;
  in >> table.subband_count >> table.resolution >> method >> count;
  table.method = method == "monte-carlo" ? PhiBuildMethod::kMonteCarlo
                                         : PhiBuildMethod::kLogDomainConvolution;
  table.x.resize(count);
  table.q.resize(count);
  std::string sx, sq;
  for (std::size_t i = 0; i < count; ++i) {
    in >> sx >> sq;
    table.x[i] = std::strtod(sx.c_str(), nullptr);
    table.q[i] = std::strtod(sq.c_str(), nullptr);
  }
  if (!in) throw std::runtime_error("load_phi_table: truncated file " + path);
  validate_invariants(table);
  return table;
}

const char* to_string(PhiBuildMethod method) {
  return method == PhiBuildMethod::kMonteCarlo ? "monte-carlo"
                                               : "log-domain-convolution";
}

}  // namespace ackofdm
