#include "ackofdm/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ackofdm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  const double v = std::stod(value, &used);
  if (used != value.size())
    throw std::invalid_argument("config: bad number for " + key + ": " + value);
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  const long v = std::stol(value, &used);
  if (used != value.size())
    throw std::invalid_argument("config: bad integer for " + key + ": " + value);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_provenance(std::ostream& out, const KeyValueMap& kv,
                      const RunConfig& rc) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(kv)));
  out << "# ackofdm config_hash=" << hash << " seed=" << rc.system.seed
      << " phi_method=" << to_string(rc.phi_method)
      << " phi_resolution=" << rc.phi_resolution << '\n';
}

void write_metrics_header(std::ostream& out) {
  out << "scheduler,sweep_parameter,sweep_value,trials,goodput_bits_mean,"
         "goodput_bits_se,goodput_bps_hz,per,per_se,zero_rate_fraction\n";
}

void write_metrics_row(std::ostream& out, const std::string& scheduler,
                       const std::string& parameter, double value,
                       const AggregateMetrics& m) {
  out << scheduler << ',' << parameter << ',' << format_double(value) << ','
      << m.trials << ',' << format_double(m.goodput_mean) << ','
      << format_double(m.goodput_se) << ',' << format_double(m.goodput_bps_hz)
      << ',' << format_double(m.per) << ',' << format_double(m.per_se) << ','
      << format_double(m.zero_rate_fraction) << '\n';
}

void write_mean_trace(const std::filesystem::path& path, const KeyValueMap& kv,
                      const RunConfig& rc, const AggregateMetrics& m) {
  std::ofstream out(path);
  write_provenance(out, kv, rc);
  out << "slot,power_mean,rate_mean,theta_mean\n";
  for (std::size_t i = 0; i < m.mean_power.size(); ++i)
    out << i + 1 << ',' << format_double(m.mean_power[i]) << ','
        << format_double(m.mean_rate[i]) << ','
        << format_double(m.mean_theta[i]) << '\n';
}

// Re-simulates a handful of trials and checks the trace-level contracts the
// schedulers promise: the power budget telescopes to P0 and the selected
// user's bounds stay monotone under the ideal feedback model.
bool traces_healthy(const RunConfig& rc, const PhiTable& phi) {
  const SystemConfig& cfg = rc.system;
  if (!(cfg.total_power > 0.0)) return true;
  // Bound monotonicity is only promised when the feedback actually reflects
  // the threshold test on a static channel.
  const bool monotone_bounds =
      cfg.ack_model == AckModel::kIdeal && cfg.doppler_max == 0.0;
  const int sample = std::min(rc.trials, 128);
  for (int t = 0; t < sample; ++t) {
    Rng rng = Rng::for_trial(cfg.seed, static_cast<std::uint64_t>(t));
    const ChannelRealization channel = draw_channel(cfg, rng);
    const SlotTrace trace = run_time_slot(cfg, phi, channel, rng);
    double spent = 0.0;
    for (const Decision& d : trace.decisions) spent += d.power;
    if (std::abs(spent - cfg.total_power) > 1e-9 * cfg.total_power)
      return false;
    if (!monotone_bounds) continue;
    for (std::size_t i = 1; i < trace.selected_lower.size(); ++i) {
      const bool same_user =
          trace.decisions[i].user == trace.decisions[i - 1].user;
      if (!same_user) continue;
      if (trace.selected_lower[i] < trace.selected_lower[i - 1]) return false;
      if (trace.selected_upper[i] > trace.selected_upper[i - 1]) return false;
    }
  }
  return true;
}

std::vector<Scheduler> default_schedulers(const RunConfig& rc) {
  std::vector<Scheduler> list = {Scheduler::kProposed, Scheduler::kPerfectCsit,
                                 Scheduler::kRoundRobin};
  // the DP oracle only reaches desk-scale single-user horizons
  if (rc.system.users == 1 &&
      rc.system.packets_per_slot <= OracleConfig::kMaxDpHorizon)
    list.push_back(Scheduler::kOracleReplay);
  return list;
}

int command_run(const RunManifest& manifest, const KeyValueMap& kv,
                const RunConfig& rc) {
  const PhiTable phi =
      build_phi(rc.system.subbands, rc.phi_resolution, rc.phi_method);
  std::filesystem::create_directories(manifest.out_dir);

  std::ofstream metrics(std::filesystem::path(manifest.out_dir) /
                        "metrics.csv");
  write_provenance(metrics, kv, rc);
  write_metrics_header(metrics);

  for (const Scheduler scheduler : rc.schedulers) {
    ExperimentSpec spec;
    spec.config = rc.system;
    spec.scheduler = scheduler;
    spec.trials = rc.trials;
    spec.threads = rc.threads;
    spec.bandwidth_hz = rc.bandwidth_hz;
    spec.oracle_theta_grid = rc.oracle_theta_grid;
    spec.oracle_power_mode = rc.oracle_power_mode;
    spec.oracle_power_fractions = rc.oracle_power_fractions;
    const AggregateMetrics m = run_experiment(spec, phi);
    write_metrics_row(metrics, to_string(scheduler), "", 0.0, m);
    write_mean_trace(std::filesystem::path(manifest.out_dir) /
                         (std::string("mean_trace_") + to_string(scheduler) +
                          ".csv"),
                     kv, rc, m);

    for (int t = 0; t < std::min(rc.trace_trials, rc.trials); ++t) {
      Rng rng = Rng::for_trial(rc.system.seed, static_cast<std::uint64_t>(t));
      const ChannelRealization channel = draw_channel(rc.system, rng);
      SlotTrace trace;
      switch (scheduler) {
        case Scheduler::kProposed:
          trace = run_time_slot(rc.system, phi, channel, rng);
          break;
        case Scheduler::kPerfectCsit:
          trace = perfect_csit_slot(rc.system, channel);
          break;
        case Scheduler::kRoundRobin:
          trace = round_robin_slot(rc.system, phi, channel, rng);
          break;
        case Scheduler::kOracleReplay:
          continue;  // covered by oracle-compare's tree dump
      }
      std::ofstream trace_out(
          std::filesystem::path(manifest.out_dir) /
          (std::string("trace_") + to_string(scheduler) + "_" +
           std::to_string(t) + ".csv"));
      write_provenance(trace_out, kv, rc);
      write_slot_trace(trace_out, trace);
    }
  }

  if (!traces_healthy(rc, phi)) {
    std::cerr << "ackofdm: trace invariant violation detected\n";
    return kExitViolation;
  }
  return kExitOk;
}

int command_sweep(const RunManifest& manifest, const KeyValueMap& kv,
                  const RunConfig& rc) {
  if (!rc.sweep) {
    std::cerr << "ackofdm: sweep requested without sweep_parameter/"
                 "sweep_values or --fig preset\n";
    return kExitBadConfig;
  }
  std::filesystem::create_directories(manifest.out_dir);

  std::map<int, PhiTable> cache;
  const PhiProvider provider = [&](int subbands) -> const PhiTable& {
    auto it = cache.find(subbands);
    if (it == cache.end())
      it = cache.emplace(subbands, build_phi(subbands, rc.phi_resolution,
                                             rc.phi_method))
               .first;
    return it->second;
  };

  ExperimentSpec spec;
  spec.config = rc.system;
  spec.trials = rc.trials;
  spec.threads = rc.threads;
  spec.bandwidth_hz = rc.bandwidth_hz;
  spec.sweep = rc.sweep;

  const std::vector<SweepRow> rows = sweep(spec, rc.schedulers, provider);

  std::ofstream out(std::filesystem::path(manifest.out_dir) /
                    (std::string("sweep_") + to_string(rc.sweep->parameter) +
                     ".csv"));
  write_provenance(out, kv, rc);
  write_metrics_header(out);
  for (const SweepRow& row : rows)
    write_metrics_row(out, to_string(row.scheduler),
                      to_string(rc.sweep->parameter), row.value, row.metrics);
  return kExitOk;
}

int command_oracle_compare(const RunManifest& manifest, const KeyValueMap& kv,
                           const RunConfig& rc) {
  OracleConfig ocfg;
  ocfg.sys = rc.system;
  ocfg.sys.users = 1;
  ocfg.horizon = rc.oracle_horizon;
  ocfg.theta_grid = rc.oracle_theta_grid;
  ocfg.power_mode = rc.oracle_power_mode;
  ocfg.power_fractions = rc.oracle_power_fractions;

  const PhiTable phi =
      build_phi(ocfg.sys.subbands, rc.phi_resolution, rc.phi_method);
  const SystemConfig oracle_sys = ocfg.system();
  const TreeEvaluation closed =
      enumerate_policy_value(closed_form_policy(oracle_sys, phi), ocfg, phi);
  const TreeEvaluation best = dp_optimal(ocfg, phi);
  const double ratio = best.value > 0.0 ? closed.value / best.value : 1.0;

  std::filesystem::create_directories(manifest.out_dir);
  std::ofstream report(std::filesystem::path(manifest.out_dir) /
                       "oracle_compare.txt");
  write_provenance(report, kv, rc);
  report << "closed_form_value=" << format_double(closed.value) << '\n'
         << "dp_optimal_value=" << format_double(best.value) << '\n'
         << "ratio=" << format_double(ratio) << '\n'
         << "threshold=" << format_double(rc.oracle_ratio_threshold) << '\n';
  std::ofstream tree(std::filesystem::path(manifest.out_dir) /
                     "oracle_tree.csv");
  write_provenance(tree, kv, rc);
  dump_policy_tree(tree, best);

  std::cout << "closed-form value: " << closed.value
            << "\ndp optimal value:  " << best.value << "\nratio: " << ratio
            << '\n';
  return ratio >= rc.oracle_ratio_threshold ? kExitOk : kExitViolation;
}

int command_phi_table(const RunManifest& manifest) {
  const PhiBuildMethod method = manifest.phi_method == "monte-carlo"
                                    ? PhiBuildMethod::kMonteCarlo
                                    : PhiBuildMethod::kLogDomainConvolution;
  const PhiTable table =
      build_phi(manifest.phi_subbands, manifest.phi_resolution, method);
  std::filesystem::create_directories(manifest.out_dir);
  char name[128];
  std::snprintf(name, sizeof name, "phi_D%d_R%d_%s.txt", table.subband_count,
                table.resolution, to_string(table.method));
  const auto path = std::filesystem::path(manifest.out_dir) / name;
  save_phi_table(table, path.string());
  std::cout << "wrote " << path.string() << " (" << table.x.size()
            << " grid points)\n";
  return kExitOk;
}

}  // namespace

KeyValueMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  KeyValueMap kv;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " +
                                  std::to_string(line_number) +
                                  " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key on line " +
                                  std::to_string(line_number));
    kv[key] = value;
  }
  return kv;
}

void apply_override(KeyValueMap& kv, const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key=value: " +
                                key_equals_value);
  kv[trim(key_equals_value.substr(0, eq))] =
      trim(key_equals_value.substr(eq + 1));
}

RunConfig make_run_config(const KeyValueMap& kv) {
  RunConfig rc;
  for (const auto& [key, value] : kv) {
    if (key == "subcarriers")
      rc.system.subcarriers = static_cast<int>(parse_long(key, value));
    else if (key == "subbands")
      rc.system.subbands = static_cast<int>(parse_long(key, value));
    else if (key == "users")
      rc.system.users = static_cast<int>(parse_long(key, value));
    else if (key == "packets_per_slot")
      rc.system.packets_per_slot = static_cast<int>(parse_long(key, value));
    else if (key == "slot_duration_s")
      rc.system.slot_duration = parse_double(key, value);
    else if (key == "total_power_w")
      rc.system.total_power = parse_double(key, value);
    else if (key == "target_per")
      rc.system.target_per = parse_double(key, value);
    else if (key == "ack_model") {
      if (value == "ideal")
        rc.system.ack_model = AckModel::kIdeal;
      else if (value == "exact")
        rc.system.ack_model = AckModel::kExact;
      else
        throw std::invalid_argument("config: ack_model must be ideal|exact");
    } else if (key == "doppler_max_hz")
      rc.system.doppler_max = parse_double(key, value);
    else if (key == "seed")
      rc.system.seed = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "trials")
      rc.trials = static_cast<int>(parse_long(key, value));
    else if (key == "threads")
      rc.threads = static_cast<int>(parse_long(key, value));
    else if (key == "trace_trials")
      rc.trace_trials = static_cast<int>(parse_long(key, value));
    else if (key == "bandwidth_hz")
      rc.bandwidth_hz = parse_double(key, value);
    else if (key == "schedulers") {
      rc.schedulers.clear();
      for (const std::string& name : split(value, ',')) {
        const auto s = scheduler_from_string(name);
        if (!s)
          throw std::invalid_argument("config: unknown scheduler " + name);
        rc.schedulers.push_back(*s);
      }
    } else if (key == "phi_resolution")
      rc.phi_resolution = static_cast<int>(parse_long(key, value));
    else if (key == "phi_method") {
      if (value == "log-domain-convolution")
        rc.phi_method = PhiBuildMethod::kLogDomainConvolution;
      else if (value == "monte-carlo")
        rc.phi_method = PhiBuildMethod::kMonteCarlo;
      else
        throw std::invalid_argument("config: unknown phi_method " + value);
    } else if (key == "sweep_parameter") {
      if (value.empty()) continue;
      const auto p = sweep_parameter_from_string(value);
      if (!p)
        throw std::invalid_argument("config: unknown sweep_parameter " + value);
      if (!rc.sweep) rc.sweep.emplace();
      rc.sweep->parameter = *p;
    } else if (key == "sweep_values") {
      if (value.empty()) continue;
      if (!rc.sweep) rc.sweep.emplace();
      rc.sweep->values.clear();
      for (const std::string& v : split(value, ','))
        rc.sweep->values.push_back(parse_double(key, v));
    } else if (key == "oracle_horizon")
      rc.oracle_horizon = static_cast<int>(parse_long(key, value));
    else if (key == "oracle_theta_grid")
      rc.oracle_theta_grid = static_cast<int>(parse_long(key, value));
    else if (key == "oracle_power_mode") {
      if (value == "closed-form-schedule")
        rc.oracle_power_mode = PowerMode::kClosedFormSchedule;
      else if (value == "grid")
        rc.oracle_power_mode = PowerMode::kGrid;
      else
        throw std::invalid_argument("config: unknown oracle_power_mode " +
                                    value);
    } else if (key == "oracle_power_fractions")
      rc.oracle_power_fractions = static_cast<int>(parse_long(key, value));
    else if (key == "oracle_ratio_threshold")
      rc.oracle_ratio_threshold = parse_double(key, value);
    else
      throw std::invalid_argument("config: unknown key " + key);
  }
  if (rc.schedulers.empty()) rc.schedulers = default_schedulers(rc);
  rc.system.validate();
  if (rc.trials < 1) throw std::invalid_argument("config: trials >= 1");
  if (rc.sweep && (rc.sweep->values.empty()))
    throw std::invalid_argument("config: sweep_values must be non-empty");
  if (rc.sweep)
    for (const double v : rc.sweep->values)
      apply_sweep_value(rc.system, rc.sweep->parameter, v);  // domain check
  return rc;
}

std::uint64_t config_hash(const KeyValueMap& kv) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto mix = [&h](const std::string& s) {
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [key, value] : kv) {  // std::map: already sorted
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  return h;
}

std::optional<KeyValueMap> figure_preset(const std::string& name) {
  // Nominal parameter sets of the reference experiments. The published
  // power/SNR pairing is not recoverable from its description, so the
  // preset total power is the nominal 24 W; override total_power_w to move
  // the system into its high-SNR operating region.
  KeyValueMap kv = {{"subcarriers", "64"}, {"slot_duration_s", "0.1"},
                    {"packets_per_slot", "30"}, {"total_power_w", "24"},
                    {"users", "3"}, {"subbands", "3"}, {"target_per", "0.05"}};
  if (name == "numch") {
    kv["sweep_parameter"] = "subbands";
    kv["sweep_values"] = "1,2,3,4,5";
  } else if (name == "snr") {
    kv["sweep_parameter"] = "total_power";
    kv["sweep_values"] = "24,240,2400,24000,240000";
  } else if (name == "users") {
    kv["sweep_parameter"] = "users";
    kv["sweep_values"] = "1,2,3,4,5,6,7,8,9";
  } else if (name == "outage") {
    kv["sweep_parameter"] = "target_per";
    kv["sweep_values"] = "0.01,0.03,0.05,0.07,0.1,0.2,0.5";
  } else if (name == "doppler") {
    kv["users"] = "4";
    kv["target_per"] = "0.1";
    kv["sweep_parameter"] = "doppler_max";
    kv["sweep_values"] = "0,5,10,25,50,100";
  } else {
    return std::nullopt;
  }
  return kv;
}

int run_manifest(const RunManifest& manifest) {
  try {
    if (manifest.command == RunManifest::Command::kPhiTable)
      return command_phi_table(manifest);

    KeyValueMap kv;
    if (!manifest.config_path.empty())
      kv = parse_config_file(manifest.config_path);
    if (!manifest.fig.empty()) {
      const auto preset = figure_preset(manifest.fig);
      if (!preset) {
        std::cerr << "ackofdm: unknown figure preset '" << manifest.fig
                  << "'\n";
        return kExitBadConfig;
      }
      for (const auto& [key, value] : *preset) kv[key] = value;
    }
    for (const std::string& kv_pair : manifest.overrides)
      apply_override(kv, kv_pair);
    if (manifest.seed) kv["seed"] = std::to_string(*manifest.seed);
    if (manifest.trials) kv["trials"] = std::to_string(*manifest.trials);
    if (!manifest.schedulers.empty()) {
      std::string joined;
      for (const std::string& s : manifest.schedulers)
        joined += (joined.empty() ? "" : ",") + s;
      kv["schedulers"] = joined;
    }

    const RunConfig rc = make_run_config(kv);
    switch (manifest.command) {
      case RunManifest::Command::kRun:
        return command_run(manifest, kv, rc);
      case RunManifest::Command::kSweep:
        return command_sweep(manifest, kv, rc);
      case RunManifest::Command::kOracleCompare:
        return command_oracle_compare(manifest, kv, rc);
      case RunManifest::Command::kPhiTable:
        break;  // handled above
    }
    return kExitBadConfig;
  } catch (const resource_limit_error& e) {
    std::cerr << "ackofdm: " << e.what() << '\n';
    return kExitResourceLimit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ackofdm: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "ackofdm: " << e.what() << '\n';
    return kExitBadConfig;
  }
}

}  // namespace ackofdm
