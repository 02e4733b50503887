#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ackofdm/baselines.hpp"
#include "ackofdm/oracle.hpp"

namespace ackofdm {

enum class Scheduler { kProposed, kPerfectCsit, kRoundRobin, kOracleReplay };

const char* to_string(Scheduler scheduler);
std::optional<Scheduler> scheduler_from_string(const std::string& name);

enum class SweepParameter {
  kSubbands, kUsers, kTargetPer, kDopplerMax, kTotalPower, kPacketsPerSlot,
};
const char* to_string(SweepParameter parameter);
std::optional<SweepParameter> sweep_parameter_from_string(
    const std::string& name);

struct ExperimentSpec {
  SystemConfig config;
  Scheduler scheduler = Scheduler::kProposed;
  int trials = 1000;
  int threads = 0;                     // 0: pick from hardware
  std::optional<double> bandwidth_hz;  // enables the b/s/Hz column
  // oracle_replay needs a DP-sized instance; grids as configured here
  int oracle_theta_grid = 32;
  PowerMode oracle_power_mode = PowerMode::kClosedFormSchedule;
  int oracle_power_fractions = 4;

  struct Sweep {
    SweepParameter parameter;
    std::vector<double> values;
  };
  std::optional<Sweep> sweep;
};

struct AggregateMetrics {
  int trials = 0;
  double goodput_mean = 0.0;  // bits per time slot
  double goodput_se = 0.0;
  double goodput_bps_hz = 0.0;  // 0 when no bandwidth is configured
  double per = 0.0;             // packet errors / packets transmitted
  double per_se = 0.0;
  double zero_rate_fraction = 0.0;  // slots whose rate clamped to zero
  std::vector<double> mean_power;   // per packet slot, averaged over trials
  std::vector<double> mean_rate;
  std::vector<double> mean_theta;
};

// Runs `trials` independent time slots of one scheduler. Deterministic for a
// given (config.seed, scheduler): per-trial streams derive from the trial
// index and partial sums reduce in fixed chunk order, so results do not
// depend on the thread count.
AggregateMetrics run_experiment(const ExperimentSpec& spec,
                                const PhiTable& phi);

struct SweepRow {
  double value = 0.0;
  Scheduler scheduler = Scheduler::kProposed;
  AggregateMetrics metrics;
};

using PhiProvider = std::function<const PhiTable&(int subband_count)>;

// One row per (sweep value, scheduler); phi is re-requested whenever the
// subband count changes.
std::vector<SweepRow> sweep(const ExperimentSpec& spec,
                            const std::vector<Scheduler>& schedulers,
                            const PhiProvider& phi_provider);

// Applies one sweep value to a config (validates domain).
SystemConfig apply_sweep_value(const SystemConfig& base,
                               SweepParameter parameter, double value);

}  // namespace ackofdm
