#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef PUSHSUM_CLI
#error "PUSHSUM_CLI must be defined"
#endif

namespace fs = std::filesystem;

namespace {

const fs::path kPresets = PUSHSUM_PRESET_DIR;

int exit_code(const std::string& args) {
  const std::string cmd = std::string(PUSHSUM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pushsum_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string preset(const char* name) { return (kPresets / name).string(); }

}  // namespace

TEST(Cli, RunWritesFilesAndManifest) {
  const fs::path out = scratch("run");
  ASSERT_EQ(exit_code("run --config " + preset("quartic.toml") + " --trials 2 --horizon 300 --emit-trajectory --out " +
                      out.string()),
            0);
  for (const char* f : {"regret.csv", "diag.csv", "manifest.json", "trajectory_0.csv", "trajectory_1.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_DOUBLE_EQ(m["derived"]["mu"].get<double>(), 1e-3);
  EXPECT_DOUBLE_EQ(m["derived"]["xi"].get<double>(), 0.02);
  EXPECT_DOUBLE_EQ(m["derived"]["step_scale"].get<double>(), 0.5);
  EXPECT_EQ(slurp(out / "diag.csv").substr(0, 51), "round,disagreement,phi_min,phi_max,perron_residual\n");
  EXPECT_EQ(slurp(out / "trajectory_0.csv").substr(0, 35), "round,node,coord_0,coord_1,phi\n0,1,");
}

TEST(Cli, SeedReplayIsByteIdentical) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  const std::string common = "run --config " + preset("tracking.toml") + " --seed 7 --trials 3 --horizon 200 ";
  ASSERT_EQ(exit_code(common + "--jobs 1 --out " + a.string()), 0);
  ASSERT_EQ(exit_code(common + "--jobs 3 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "regret.csv"), slurp(b / "regret.csv"));
  EXPECT_EQ(slurp(a / "diag.csv"), slurp(b / "diag.csv"));
}

TEST(Cli, MissingConfigIsAConfigError) {
  EXPECT_EQ(exit_code("run --config /no/such/file.toml"), 2);
}

TEST(Cli, SweepRowsAndEmptyList) {
  const fs::path out = scratch("sweep");
  ASSERT_EQ(exit_code("sweep --config " + preset("quartic.toml") + " --trials 2 --horizons 50,100,150 --out " +
                      out.string()),
            0);
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.substr(0, 31), "T,max_avg_regret,min_avg_regret");
  EXPECT_EQ(exit_code("sweep --config " + preset("quartic.toml") + " --horizons \"\" --out " + out.string()), 2);
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(exit_code("validate --config " + preset("quartic.toml") + " --trials 1"), 0);
  const fs::path bad = scratch("bad_window.json");
  {
    std::ofstream f(bad);
    f << R"({"problem": "quartic", "graph": {"nodes": 6, "b_window": 1, "order": ["g1", "g2"],
      "graphs": {"g1": [[1,2],[2,3],[3,1],[4,5],[5,6],[3,4]], "g2": [[6,4],[4,1],[2,5],[6,1],[1,3]]}},
      "set": {"kind": "box", "lo": [-3, 0], "hi": [2, 3]},
      "algorithm": {"kind": "zo", "step_scale": 0.5, "mu": 0.001, "xi": 0.02}, "trials": 1, "horizon": 50})";
  }
  EXPECT_EQ(exit_code("validate --config " + bad.string()), 3);
  EXPECT_EQ(exit_code("run --config " + bad.string() + " --out " + scratch("bad_out").string()), 3);
}
