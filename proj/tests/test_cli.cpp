#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ackofdm/cli.hpp"

using namespace ackofdm;

namespace {

namespace fs = std::filesystem;

fs::path write_temp_config(const std::string& name, const std::string& body) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

constexpr const char* kTinyConfig =
    "# tiny but live configuration\n"
    "subcarriers = 64\n"
    "subbands = 2\n"
    "users = 2\n"
    "packets_per_slot = 8\n"
    "slot_duration_s = 0.1\n"
    "total_power_w = 16000\n"
    "target_per = 0.05\n"
    "seed = 5\n"
    "trials = 120\n"
    "phi_resolution = 4096\n";

}  // namespace

TEST_CASE("cli: config parsing") {
  const fs::path path = write_temp_config("ackofdm_cfg_parse.cfg", kTinyConfig);
  const KeyValueMap kv = parse_config_file(path.string());
  const RunConfig rc = make_run_config(kv);
  CHECK(rc.system.subcarriers == 64);
  CHECK(rc.system.users == 2);
  CHECK(rc.trials == 120);
  CHECK(rc.phi_resolution == 4096);
  CHECK(rc.schedulers.size() == 3);  // oracle replay needs M <= 6, users == 1
  fs::remove(path);

  SUBCASE("rejections") {
    KeyValueMap bad = kv;
    bad["target_per"] = "0";
    CHECK_THROWS_AS(make_run_config(bad), std::invalid_argument);
    bad = kv;
    bad["no_such_key"] = "1";
    CHECK_THROWS_AS(make_run_config(bad), std::invalid_argument);
    bad = kv;
    bad["trials"] = "twelve";
    CHECK_THROWS_AS(make_run_config(bad), std::invalid_argument);
    bad = kv;
    bad["schedulers"] = "proposed,genie";
    CHECK_THROWS_AS(make_run_config(bad), std::invalid_argument);
  }
}

TEST_CASE("cli: config hash is canonical and value-sensitive") {
  KeyValueMap a = {{"users", "3"}, {"seed", "1"}};
  KeyValueMap b = {{"seed", "1"}, {"users", "3"}};
  CHECK(config_hash(a) == config_hash(b));
  b["seed"] = "2";
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("cli: figure presets") {
  const auto numch = figure_preset("numch");
  REQUIRE(numch.has_value());
  CHECK(numch->at("sweep_parameter") == "subbands");
  CHECK(numch->at("sweep_values") == "1,2,3,4,5");
  CHECK(numch->at("total_power_w") == "24");
  CHECK(figure_preset("doppler").has_value());
  CHECK_FALSE(figure_preset("nope").has_value());
}

TEST_CASE("cli: run command writes idempotent artifacts") {
  const fs::path cfg = write_temp_config("ackofdm_cfg_run.cfg", kTinyConfig);
  const fs::path out_dir = fs::temp_directory_path() / "ackofdm_run_out";
  fs::remove_all(out_dir);

  RunManifest manifest;
  manifest.command = RunManifest::Command::kRun;
  manifest.config_path = cfg.string();
  manifest.out_dir = out_dir.string();
  manifest.trials = 60;
  manifest.schedulers = {"proposed", "round_robin"};
  REQUIRE(run_manifest(manifest) == kExitOk);

  const fs::path metrics = out_dir / "metrics.csv";
  REQUIRE(fs::exists(metrics));
  const std::string first = slurp(metrics);
  CHECK(first.rfind("# ackofdm config_hash=", 0) == 0);
  CHECK(first.find("proposed") != std::string::npos);
  CHECK(first.find("round_robin") != std::string::npos);
  CHECK(fs::exists(out_dir / "mean_trace_proposed.csv"));

  REQUIRE(run_manifest(manifest) == kExitOk);
  CHECK(slurp(metrics) == first);  // byte-identical rerun
  fs::remove_all(out_dir);
  fs::remove(cfg);
}

TEST_CASE("cli: exit codes") {
  SUBCASE("bad config value") {
    const fs::path cfg = write_temp_config(
        "ackofdm_cfg_bad.cfg", std::string(kTinyConfig) + "target_per = 0\n");
    RunManifest manifest;
    manifest.command = RunManifest::Command::kRun;
    manifest.config_path = cfg.string();
    manifest.out_dir =
        (fs::temp_directory_path() / "ackofdm_bad_out").string();
    CHECK(run_manifest(manifest) == kExitBadConfig);
    fs::remove(cfg);
  }

  SUBCASE("unknown preset") {
    RunManifest manifest;
    manifest.command = RunManifest::Command::kSweep;
    manifest.fig = "fig99";
    manifest.out_dir =
        (fs::temp_directory_path() / "ackofdm_fig_out").string();
    CHECK(run_manifest(manifest) == kExitBadConfig);
  }

  SUBCASE("sweep without sweep keys") {
    const fs::path cfg =
        write_temp_config("ackofdm_cfg_nosweep.cfg", kTinyConfig);
    RunManifest manifest;
    manifest.command = RunManifest::Command::kSweep;
    manifest.config_path = cfg.string();
    manifest.out_dir =
        (fs::temp_directory_path() / "ackofdm_nosweep_out").string();
    CHECK(run_manifest(manifest) == kExitBadConfig);
    fs::remove(cfg);
  }

  SUBCASE("oracle horizon beyond the enumeration budget") {
    const fs::path cfg = write_temp_config(
        "ackofdm_cfg_deep.cfg",
        "users = 1\nsubbands = 1\npackets_per_slot = 13\n"
        "total_power_w = 4000\ntarget_per = 0.05\nsubcarriers = 64\n"
        "slot_duration_s = 0.1\noracle_horizon = 13\nphi_resolution = 4096\n");
    RunManifest manifest;
    manifest.command = RunManifest::Command::kOracleCompare;
    manifest.config_path = cfg.string();
    manifest.out_dir =
        (fs::temp_directory_path() / "ackofdm_deep_out").string();
    CHECK(run_manifest(manifest) == kExitResourceLimit);
    fs::remove(cfg);
  }
}

TEST_CASE("cli: oracle compare on a small instance") {
  const fs::path cfg = write_temp_config(
      "ackofdm_cfg_oracle.cfg",
      "users = 1\nsubbands = 1\npackets_per_slot = 5\n"
      "total_power_w = 4000\ntarget_per = 0.05\nsubcarriers = 64\n"
      "slot_duration_s = 0.1\noracle_horizon = 5\nphi_resolution = 4096\n"
      "oracle_ratio_threshold = 0.95\n");
  const fs::path out_dir = fs::temp_directory_path() / "ackofdm_oracle_out";
  fs::remove_all(out_dir);
  RunManifest manifest;
  manifest.command = RunManifest::Command::kOracleCompare;
  manifest.config_path = cfg.string();
  manifest.out_dir = out_dir.string();
  CHECK(run_manifest(manifest) == kExitOk);
  CHECK(fs::exists(out_dir / "oracle_compare.txt"));
  CHECK(fs::exists(out_dir / "oracle_tree.csv"));
  const std::string report = slurp(out_dir / "oracle_compare.txt");
  CHECK(report.find("ratio=") != std::string::npos);
  fs::remove_all(out_dir);
  fs::remove(cfg);
}

TEST_CASE("cli: overrides") {
  KeyValueMap kv;
  apply_override(kv, "total_power_w=61440");
  CHECK(kv.at("total_power_w") == "61440");
  CHECK_THROWS_AS(apply_override(kv, "not-a-pair"), std::invalid_argument);
}
