#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ackofdm/sim.hpp"

namespace ackofdm {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;     // trace invariant broke
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitResourceLimit = 3;

struct RunManifest {
  enum class Command { kRun, kSweep, kOracleCompare, kPhiTable };
  Command command = Command::kRun;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string fig;                       // sweep preset name
  std::vector<std::string> schedulers;   // overrides the config list
  std::vector<std::string> overrides;    // key=value pairs, applied last
  // phi-table command inputs
  int phi_subbands = 3;
  int phi_resolution = 16384;
  std::string phi_method = "log-domain-convolution";
};

// Flat key=value configuration (full schema in the README).
using KeyValueMap = std::map<std::string, std::string>;

KeyValueMap parse_config_file(const std::string& path);
void apply_override(KeyValueMap& kv, const std::string& key_equals_value);

struct RunConfig {
  SystemConfig system;
  int trials = 1000;
  int threads = 0;
  int trace_trials = 0;
  std::optional<double> bandwidth_hz;
  std::vector<Scheduler> schedulers;
  int phi_resolution = 16384;
  PhiBuildMethod phi_method = PhiBuildMethod::kLogDomainConvolution;
  std::optional<ExperimentSpec::Sweep> sweep;
  int oracle_horizon = 5;
  int oracle_theta_grid = 32;
  PowerMode oracle_power_mode = PowerMode::kClosedFormSchedule;
  int oracle_power_fractions = 4;
  double oracle_ratio_threshold = 0.95;
};

// Validates while converting; throws std::invalid_argument with a diagnostic.
RunConfig make_run_config(const KeyValueMap& kv);

// FNV-1a over the canonical sorted key=value form; goes into CSV headers.
std::uint64_t config_hash(const KeyValueMap& kv);

// Known sweep presets (numch, snr, users, outage, doppler); returns the
// key=value deltas, or nullopt for an unknown name.
std::optional<KeyValueMap> figure_preset(const std::string& name);

// Executes one manifest end to end. Never throws; maps errors to exit codes.
int run_manifest(const RunManifest& manifest);

}  // namespace ackofdm
