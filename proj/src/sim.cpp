#include "ackofdm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace ackofdm {

const char* to_string(Scheduler scheduler) {
  switch (scheduler) {
    case Scheduler::kProposed: return "proposed";
    case Scheduler::kPerfectCsit: return "perfect_csit";
    case Scheduler::kRoundRobin: return "round_robin";
    case Scheduler::kOracleReplay: return "oracle_replay";
  }
  return "?";
}

std::optional<Scheduler> scheduler_from_string(const std::string& name) {
  if (name == "proposed") return Scheduler::kProposed;
  if (name == "perfect_csit") return Scheduler::kPerfectCsit;
  if (name == "round_robin") return Scheduler::kRoundRobin;
  if (name == "oracle_replay") return Scheduler::kOracleReplay;
  return std::nullopt;
}

const char* to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::kSubbands: return "subbands";
    case SweepParameter::kUsers: return "users";
    case SweepParameter::kTargetPer: return "target_per";
    case SweepParameter::kDopplerMax: return "doppler_max";
    case SweepParameter::kTotalPower: return "total_power";
    case SweepParameter::kPacketsPerSlot: return "packets_per_slot";
  }
  return "?";
}

std::optional<SweepParameter> sweep_parameter_from_string(
    const std::string& name) {
  if (name == "subbands") return SweepParameter::kSubbands;
  if (name == "users") return SweepParameter::kUsers;
  if (name == "target_per") return SweepParameter::kTargetPer;
  if (name == "doppler_max") return SweepParameter::kDopplerMax;
  if (name == "total_power") return SweepParameter::kTotalPower;
  if (name == "packets_per_slot") return SweepParameter::kPacketsPerSlot;
  return std::nullopt;
}

namespace {

struct TrialStats {
  double goodput = 0.0;
  int errors = 0;
  int zero_rate_slots = 0;
  std::vector<double> power;
  std::vector<double> rate;
  std::vector<double> theta;
};

TrialStats stats_from_trace(const SlotTrace& trace) {
  TrialStats s;
  s.goodput = trace.goodput_bits;
  s.errors = trace.packet_errors;
  s.power.reserve(trace.decisions.size());
  for (const Decision& d : trace.decisions) {
    s.zero_rate_slots += d.rate > 0.0 ? 0 : 1;
    s.power.push_back(d.power);
    s.rate.push_back(d.rate);
    s.theta.push_back(d.theta);
  }
  return s;
}

// Fixed-size chunks keep the reduction order independent of thread count.
constexpr int kChunkTrials = 64;

}  // namespace

AggregateMetrics run_experiment(const ExperimentSpec& spec,
                                const PhiTable& phi) {
  const SystemConfig& cfg = spec.config;
  cfg.validate();
  if (spec.trials < 1)
    throw std::invalid_argument("run_experiment: trials >= 1");
  if (phi.subband_count != cfg.subbands)
    throw std::invalid_argument(
        "run_experiment: phi table was built for a different subband count");

  // The DP tree is shared read-only across trials.
  TreeEvaluation oracle_tree;
  if (spec.scheduler == Scheduler::kOracleReplay) {
    OracleConfig ocfg;
    ocfg.sys = cfg;
    ocfg.horizon = cfg.packets_per_slot;
    ocfg.theta_grid = spec.oracle_theta_grid;
    ocfg.power_mode = spec.oracle_power_mode;
    ocfg.power_fractions = spec.oracle_power_fractions;
    oracle_tree = dp_optimal(ocfg, phi);
  }

  const auto run_trial = [&](std::uint64_t trial) -> TrialStats {
    Rng rng = Rng::for_trial(cfg.seed, trial);
    const ChannelRealization channel = draw_channel(cfg, rng);
    switch (spec.scheduler) {
      case Scheduler::kProposed:
        return stats_from_trace(run_time_slot(cfg, phi, channel, rng));
      case Scheduler::kPerfectCsit:
        return stats_from_trace(perfect_csit_slot(cfg, channel));
      case Scheduler::kRoundRobin:
        return stats_from_trace(round_robin_slot(cfg, phi, channel, rng));
      case Scheduler::kOracleReplay:
        return stats_from_trace(replay_online(oracle_tree, channel, rng));
    }
    throw std::logic_error("run_experiment: unknown scheduler");
  };

  const int trials = spec.trials;
  const int chunks = (trials + kChunkTrials - 1) / kChunkTrials;
  std::vector<TrialStats> per_trial(trials);

  int threads = spec.threads;
  if (threads <= 0)
    threads = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, chunks);

  std::atomic<int> next_chunk{0};
  const auto worker = [&] {
    for (;;) {
      const int chunk = next_chunk.fetch_add(1);
      if (chunk >= chunks) return;
      const int begin = chunk * kChunkTrials;
      const int end = std::min(trials, begin + kChunkTrials);
      for (int t = begin; t < end; ++t)
        per_trial[t] = run_trial(static_cast<std::uint64_t>(t));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Sequential reduction in trial order: bit-identical for any thread count.
  AggregateMetrics agg;
  agg.trials = trials;
  const int horizon = cfg.packets_per_slot;
  agg.mean_power.assign(horizon, 0.0);
  agg.mean_rate.assign(horizon, 0.0);
  agg.mean_theta.assign(horizon, 0.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  double err_sum = 0.0;
  double err_sq = 0.0;
  long zero_rate = 0;
  for (const TrialStats& s : per_trial) {
    sum += s.goodput;
    sum_sq += s.goodput * s.goodput;
    const double trial_per = static_cast<double>(s.errors) / horizon;
    err_sum += trial_per;
    err_sq += trial_per * trial_per;
    zero_rate += s.zero_rate_slots;
    for (int m = 0; m < horizon; ++m) {
      agg.mean_power[m] += s.power[m];
      agg.mean_rate[m] += s.rate[m];
      agg.mean_theta[m] += s.theta[m];
    }
  }
  const double n = static_cast<double>(trials);
  agg.goodput_mean = sum / n;
  agg.per = err_sum / n;
  if (trials > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    agg.goodput_se = std::sqrt(var / n);
    const double per_var =
        std::max(0.0, (err_sq - err_sum * err_sum / n) / (n - 1.0));
    agg.per_se = std::sqrt(per_var / n);
  }
  agg.zero_rate_fraction = static_cast<double>(zero_rate) / (n * horizon);
  if (spec.bandwidth_hz && *spec.bandwidth_hz > 0.0)
    agg.goodput_bps_hz =
        agg.goodput_mean / (cfg.slot_duration * *spec.bandwidth_hz);
  for (int m = 0; m < horizon; ++m) {
    agg.mean_power[m] /= n;
    agg.mean_rate[m] /= n;
    agg.mean_theta[m] /= n;
  }
  return agg;
}

SystemConfig apply_sweep_value(const SystemConfig& base,
                               SweepParameter parameter, double value) {
  SystemConfig cfg = base;
  switch (parameter) {
    case SweepParameter::kSubbands:
      cfg.subbands = static_cast<int>(value);
      break;
    case SweepParameter::kUsers:
      cfg.users = static_cast<int>(value);
      break;
    case SweepParameter::kTargetPer:
      cfg.target_per = value;
      break;
    case SweepParameter::kDopplerMax:
      cfg.doppler_max = value;
      break;
    case SweepParameter::kTotalPower:
      cfg.total_power = value;
      break;
    case SweepParameter::kPacketsPerSlot:
      cfg.packets_per_slot = static_cast<int>(value);
      break;
  }
  cfg.validate();
  return cfg;
}

std::vector<SweepRow> sweep(const ExperimentSpec& spec,
                            const std::vector<Scheduler>& schedulers,
                            const PhiProvider& phi_provider) {
  if (!spec.sweep) throw std::invalid_argument("sweep: no sweep configured");
  std::vector<SweepRow> rows;
  rows.reserve(spec.sweep->values.size() * schedulers.size());
  for (std::size_t vi = 0; vi < spec.sweep->values.size(); ++vi) {
    const double value = spec.sweep->values[vi];
    for (const Scheduler scheduler : schedulers) {
      ExperimentSpec point = spec;
      point.sweep.reset();
      point.scheduler = scheduler;
      point.config =
          apply_sweep_value(spec.config, spec.sweep->parameter, value);
      // decorrelate rows while keeping each reproducible on its own
      point.config.seed = spec.config.seed + 1009 * (vi + 1) +
                          31 * static_cast<std::uint64_t>(scheduler);
      SweepRow row;
      row.value = value;
      row.scheduler = scheduler;
      row.metrics = run_experiment(point, phi_provider(point.config.subbands));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace ackofdm
