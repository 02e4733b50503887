#include <CLI11.hpp>

#include "ackofdm/cli.hpp"

int main(int argc, char** argv) {
  using ackofdm::RunManifest;

  CLI::App app{
      "ackofdm: ACK/NAK-driven cross-layer OFDM downlink scheduling "
      "simulator"};
  app.require_subcommand(1);

  RunManifest manifest;
  std::uint64_t seed = 0;
  int trials = 0;

  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* config =
        cmd->add_option("--config", manifest.config_path, "key=value file");
    if (needs_config) config->check(CLI::ExistingFile);
    cmd->add_option("--out", manifest.out_dir, "output directory");
    cmd->add_option("--seed", seed, "seed override");
    cmd->add_option("--trials", trials, "trial-count override");
    cmd->add_option("--set", manifest.overrides,
                    "config override key=value (repeatable)");
  };

  auto* run = app.add_subcommand("run", "run the configured schedulers once");
  add_common(run, true);
  run->add_option("--scheduler", manifest.schedulers,
                  "proposed|perfect_csit|round_robin|oracle_replay");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "parameter sweep, one CSV row per point");
  add_common(sweep_cmd, false);
  sweep_cmd->add_option("--fig", manifest.fig,
                        "preset: numch|snr|users|outage|doppler");
  sweep_cmd->add_option("--scheduler", manifest.schedulers,
                        "schedulers to sweep");

  auto* oracle = app.add_subcommand(
      "oracle-compare", "closed-form policy value vs finite-horizon DP");
  add_common(oracle, true);

  auto* phi = app.add_subcommand("phi-table",
                                 "build and dump a channel-product CDF table");
  phi->add_option("--out", manifest.out_dir, "output directory");
  phi->add_option("--subbands", manifest.phi_subbands, "D")->check(CLI::PositiveNumber);
  phi->add_option("--resolution", manifest.phi_resolution, "grid size");
  phi->add_option("--method", manifest.phi_method,
                  "log-domain-convolution|monte-carlo");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) manifest.command = RunManifest::Command::kRun;
  if (sweep_cmd->parsed()) manifest.command = RunManifest::Command::kSweep;
  if (oracle->parsed()) manifest.command = RunManifest::Command::kOracleCompare;
  if (phi->parsed()) manifest.command = RunManifest::Command::kPhiTable;
  for (const auto* cmd : {run, sweep_cmd, oracle}) {
    if (cmd->parsed()) {
      if (cmd->count("--seed")) manifest.seed = seed;
      if (cmd->count("--trials")) manifest.trials = trials;
    }
  }

  return ackofdm::run_manifest(manifest);
}
