#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "soilfusion/cli.hpp"
#include "soilfusion/io.hpp"

namespace fs = std::filesystem;
using soilfusion::io::read_file;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = soilfusion::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::exists(dir)) return names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

// Small forests keep these tests quick.
const std::vector<std::string> kFast{"--trees", "10"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("generate writes four files deterministically") {
  oracle::TempDir tmp("cli_gen");
  REQUIRE(cli({"generate", "--out", tmp.str("a"), "--seed", "3"}).code == 0);
  CHECK(listing(tmp.path() / "a") == std::vector<std::string>{"gpr.csv", "hsi.csv", "manifest.json", "tdr.csv"});
  REQUIRE(cli({"generate", "--out", tmp.str("b"), "--seed", "3"}).code == 0);
  for (const auto& f : listing(tmp.path() / "a")) CHECK(read_file(tmp.path() / "a" / f) == read_file(tmp.path() / "b" / f));
  REQUIRE(cli({"generate", "--out", tmp.str("c"), "--seed", "4"}).code == 0);
  CHECK(read_file(tmp.path() / "a" / "tdr.csv") != read_file(tmp.path() / "c" / "tdr.csv"));

  const auto manifest = nlohmann::json::parse(read_file(tmp.path() / "a" / "manifest.json"));
  CHECK(manifest.at("config").at("seed") == 3);

  // The manifest doubles as a campaign file.
  REQUIRE(cli({"generate", "--out", tmp.str("d"), "--campaign", tmp.str("a/manifest.json")}).code == 0);
  CHECK(read_file(tmp.path() / "d" / "hsi.csv") == read_file(tmp.path() / "a" / "hsi.csv"));
}

TEST_CASE("seed falls back to the environment") {
  oracle::TempDir tmp("cli_env");
  ::setenv(soilfusion::cli::kSeedEnv, "4", 1);
  const auto r = cli({"generate", "--out", tmp.str("env")});
  ::unsetenv(soilfusion::cli::kSeedEnv);
  REQUIRE(r.code == 0);
  REQUIRE(cli({"generate", "--out", tmp.str("flag"), "--seed", "4"}).code == 0);
  CHECK(read_file(tmp.path() / "env" / "manifest.json") == read_file(tmp.path() / "flag" / "manifest.json"));

  ::setenv(soilfusion::cli::kSeedEnv, "not-a-number", 1);
  const auto bad = cli({"generate", "--out", tmp.str("bad")});
  ::unsetenv(soilfusion::cli::kSeedEnv);
  CHECK(bad.code == 1);
  CHECK(bad.err.rfind("soilfusion: error:", 0) == 0);
}

TEST_CASE("bad paths and flags fail without output") {
  oracle::TempDir tmp("cli_bad");
  const auto r = cli({"correlate", "--in", tmp.str("missing"), "--out", tmp.str("o")});
  CHECK(r.code != 0);
  CHECK_FALSE(fs::exists(tmp.path() / "o"));

  CHECK(cli({"generate"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"simulate", "--in", tmp.str(), "--out", tmp.str("o"), "--sim-method", "spline"}).code == 2);
  CHECK(cli({"--version"}).code == 0);

  // A campaign directory with a missing file fails at load time.
  REQUIRE(cli({"generate", "--out", tmp.str("camp")}).code == 0);
  fs::remove(tmp.path() / "camp" / "tdr.csv");
  const auto s = cli({"simulate", "--in", tmp.str("camp"), "--out", tmp.str("sim")});
  CHECK(s.code == 1);
  CHECK(s.err.find('\n') == s.err.size() - 1);
  CHECK(listing(tmp.path() / "sim").empty());

  // A malformed campaign file fails the same way.
  std::ofstream(tmp.path() / "broken.json") << "{ not json";
  CHECK(cli({"generate", "--out", tmp.str("g2"), "--campaign", tmp.str("broken.json")}).code == 1);
  CHECK_FALSE(fs::exists(tmp.path() / "g2"));
}

TEST_CASE("correlate emits a per-plot table") {
  oracle::TempDir tmp("cli_corr");
  REQUIRE(cli({"generate", "--out", tmp.str("c")}).code == 0);
  REQUIRE(cli({"correlate", "--in", tmp.str("c"), "--out", tmp.str("r")}).code == 0);
  const auto table = read_file(tmp.path() / "r" / "correlation.csv");
  CHECK(table.rfind("plot,n,r,note\n1,10,", 0) == 0);
  CHECK(table.find("\nall,40,") != std::string::npos);
  CHECK(fs::exists(tmp.path() / "r" / "correlate_config.json"));
  CHECK(fs::exists(tmp.path() / "r" / "correlation_points.csv"));
}

TEST_CASE("simulate and eval produce reports and echoes") {
  oracle::TempDir tmp("cli_sim");
  REQUIRE(cli({"generate", "--out", tmp.str("c")}).code == 0);
  REQUIRE(cli(with({"simulate", "--in", tmp.str("c"), "--out", tmp.str("a1"), "--sim-method", "et"}, kFast)).code == 0);
  CHECK(fs::exists(tmp.path() / "a1" / "dataset.csv"));
  CHECK(fs::exists(tmp.path() / "a1" / "simulation_manifest.json"));
  CHECK(fs::exists(tmp.path() / "a1" / "simulate_config.json"));
  CHECK(fs::exists(tmp.path() / "a1" / "timeseries_1_4.csv"));
  const auto sim = nlohmann::json::parse(read_file(tmp.path() / "a1" / "simulation_manifest.json"));
  CHECK(sim.at("method") == "et");
  CHECK(sim.at("row_counts").at("measured") == 40);
  CHECK(sim.at("row_counts").at("simulated_gpr") == 360);

  REQUIRE(cli(with({"eval", "--in", tmp.str("a1"), "--out", tmp.str("a1")}, kFast)).code == 0);
  const auto rep = nlohmann::json::parse(read_file(tmp.path() / "a1" / "report.json"));
  CHECK(rep.at("method") == "et");
  CHECK(rep.at("experiment") == "approach1");
  CHECK(rep.contains("fi_gpr"));
  CHECK(rep.at("n_train") == 200);
  CHECK(fs::exists(tmp.path() / "a1" / "model.json"));
  CHECK(fs::exists(tmp.path() / "a1" / "eval_config.json"));

  REQUIRE(cli(with({"simulate", "--in", tmp.str("c"), "--out", tmp.str("a2"), "--experiment", "approach2"}, kFast)).code == 0);
  CHECK(fs::exists(tmp.path() / "a2" / "tdr_profile_1.csv"));
  REQUIRE(cli(with({"eval", "--in", tmp.str("a2/dataset.csv"), "--out", tmp.str("e2"), "--experiment", "approach2"}, kFast)).code == 0);
  const auto rep2 = nlohmann::json::parse(read_file(tmp.path() / "e2" / "report.json"));
  CHECK_FALSE(rep2.contains("fi_gpr"));
  CHECK(rep2.at("method") == "interpolation");

  // Wrong experiment for the dataset is a runtime failure with no output.
  CHECK(cli(with({"eval", "--in", tmp.str("a2"), "--out", tmp.str("e3"), "--experiment", "approach1"}, kFast)).code == 1);
  CHECK_FALSE(fs::exists(tmp.path() / "e3"));
}

TEST_CASE("eval sweep is independent of thread count") {
  oracle::TempDir tmp("cli_sweep");
  REQUIRE(cli({"generate", "--out", tmp.str("c")}).code == 0);
  REQUIRE(cli({"simulate", "--in", tmp.str("c"), "--out", tmp.str("s")}).code == 0);
  REQUIRE(cli(with({"eval", "--in", tmp.str("s"), "--out", tmp.str("one"), "--sweep", "4", "--threads", "1"}, kFast)).code == 0);
  REQUIRE(cli(with({"eval", "--in", tmp.str("s"), "--out", tmp.str("three"), "--sweep", "4", "--threads", "3"}, kFast)).code == 0);
  CHECK(read_file(tmp.path() / "one" / "report.csv") == read_file(tmp.path() / "three" / "report.csv"));
  const auto rep = nlohmann::json::parse(read_file(tmp.path() / "one" / "report.json"));
  CHECK(rep.at("runs").size() == 4);
  CHECK(rep.at("runs")[3].at("seed") == 3);
}

TEST_CASE("replay reproduces a command from its echo") {
  oracle::TempDir tmp("cli_replay");
  REQUIRE(cli({"generate", "--out", tmp.str("c"), "--seed", "9"}).code == 0);
  REQUIRE(cli(with({"simulate", "--in", tmp.str("c"), "--out", tmp.str("s"), "--sim-method", "linreg", "--seed", "9"}, kFast)).code == 0);
  const auto before = read_file(tmp.path() / "s" / "dataset.csv");
  fs::copy_file(tmp.path() / "s" / "simulate_config.json", tmp.path() / "echo.json");
  fs::remove_all(tmp.path() / "s");
  fs::create_directories(tmp.path() / "s");
  fs::copy_file(tmp.path() / "echo.json", tmp.path() / "s" / "simulate_config.json");
  REQUIRE(cli({"replay", tmp.str("s/simulate_config.json")}).code == 0);
  CHECK(read_file(tmp.path() / "s" / "dataset.csv") == before);
  CHECK(read_file(tmp.path() / "s" / "simulate_config.json") == read_file(tmp.path() / "echo.json"));

  REQUIRE(cli({"replay", tmp.str("c/manifest.json"), "--out", tmp.str("c2")}).code == 0);
  CHECK(read_file(tmp.path() / "c2" / "hsi.csv") == read_file(tmp.path() / "c" / "hsi.csv"));
  CHECK(read_file(tmp.path() / "c2" / "manifest.json") == read_file(tmp.path() / "c" / "manifest.json"));

  std::ofstream(tmp.path() / "junk.json") << "{\"x\": 1}";
  CHECK(cli({"replay", tmp.str("junk.json")}).code == 1);
}
