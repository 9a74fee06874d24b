#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app/config.hpp"
#include "app/csv.hpp"
#include "app/tasks.hpp"
#include "polydiff/errors.hpp"

using namespace polydiff;
using namespace polydiff::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("polydiff-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(POLYDIFF_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Presets, Defaults) {
  const auto fv = preset("fleming-viot");
  EXPECT_TRUE(fv.space.is_finite());
  EXPECT_EQ(fv.space.size(), 2u);
  EXPECT_EQ(fv.k, 2u);
  const auto spec = fv.generator();
  EXPECT_TRUE(validate_spec(spec).ok());
  EXPECT_EQ(spec.kernel(0, 1), 0.0);
  EXPECT_EQ(spec.alpha(0, 1), 1.0);

  const auto fm = preset("factor-model");
  EXPECT_TRUE(fm.space.is_grid());
  EXPECT_EQ(fm.space.size(), 51u);
  EXPECT_EQ(fm.k, 2u);
  EXPECT_EQ(fm.g.factors, 5u);

  for (const auto& name : preset_names()) EXPECT_TRUE(validate_spec(preset(name).generator()).ok()) << name;
}

TEST(Presets, FactorModelPartitionOfUnity) {
  const Space grid = preset("factor-model").space;
  const auto hats = hat_functions(grid, 5);
  ASSERT_EQ(hats.size(), 5u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (const auto& h : hats) {
      EXPECT_GE(h[i], 0.0);
      sum += h[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
  EXPECT_NE(describe_cost(preset("factor-model")).find("d^k=25"), std::string::npos);
}

TEST(Presets, UnknownNameListsAvailable) {
  try {
    preset("unknown");
    FAIL();
  } catch (const ConfigError& e) {
    for (const auto& name : preset_names()) EXPECT_NE(std::string(e.what()).find(name), std::string::npos);
  }
}

TEST(Config, Validation) {
  const fs::path dir = scratch("config");
  EXPECT_THROW(parse_config_text("{\"space\": {\"kind\": \"finite\", \"d\": 2},\n \"k\": 5}", "x.json", dir),
               ConfigError);
  EXPECT_THROW(parse_config_text("{\"preset\": \"fleming-viot\", \"seed\": -3}", "x.json", dir), ConfigError);
  EXPECT_THROW(parse_config_text("{\"preset\": \"fleming-viot\", \"times\": [1, 0.5]}", "x.json", dir), ConfigError);
  EXPECT_THROW(parse_config_text("{\"preset\": \"fleming-viot\", \"bogus\": 1}", "x.json", dir), ConfigError);
  EXPECT_EQ(parse_config_text("{\"preset\": \"fleming-viot\", \"seed\": \"18446744073709551615\"}", "x.json", dir).seed,
            18446744073709551615ull);
  try {
    parse_config_text("{\n  \"preset\": \"common-noise\",\n  \"generator\": {\"tau\": {\"csv\": \"missing.csv\"}}\n}",
                      "x.json", dir);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
  }
  try {
    parse_config_text("{\n  \"k\": 2,\n  \"times\": [1,,]\n}", "broken.json", dir);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Config, CsvField) {
  const fs::path dir = scratch("csvfield");
  std::string csv = "x,tau\n";
  for (int i = 0; i < 101; ++i) csv += std::to_string(-4.0 + 0.08 * i) + "," + (i == 0 || i == 100 ? "0" : "0.25") + "\n";
  write_file(dir / "tau.csv", csv);
  const auto c = parse_config_text(
      "{\"preset\": \"common-noise\", \"generator\": {\"tau\": {\"csv\": \"tau.csv\", \"column\": 1}}}", "x.json", dir);
  EXPECT_EQ(c.generator().drift_diffusion().tau[50], 0.25);
}

TEST(Tasks, MemoryGuardBeforeAllocation) {
  const fs::path dir = scratch("guard");
  auto c = parse_config_text(
      "{\"space\": {\"kind\": \"finite\", \"d\": 1000}, \"generator\": {\"alpha\": 1.0}, \"g\": {\"kind\": \"constant\"}, \"k\": 3, \"nu\": \"uniform\"}",
      "big.json", dir);
  try {
    run_task(Task::moments, c, {.out = dir / "out"});
    FAIL();
  } catch (const MemoryGuardError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1000000000"), std::string::npos) << msg;
    EXPECT_NE(msg.find("167167000"), std::string::npos) << msg;
  }
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Tasks, HeterozygosityColumns) {
  const fs::path dir = scratch("het");
  auto c = preset("fleming-viot-heterozygosity");
  const auto r = run_task(Task::simulate, c, {.out = dir, .quick = true});
  EXPECT_EQ(r.exit_code, 0);
  const auto rows = read_csv(dir / "simulate.csv");
  std::ifstream in(dir / "simulate.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "T,exact,sde_mean,sde_se,moran_mean,moran_se");
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) {
    EXPECT_NEAR(row[1], 2 * 0.3 * 0.7 * std::exp(-2.0 * row[0]), 1e-10);
    EXPECT_LE(std::abs(row[2] - row[1]), 4 * row[3] + 1e-2 * row[1]);
    EXPECT_LE(std::abs(row[4] - row[1]), 4 * row[5] + 1e-12);
  }
  EXPECT_NE(r.summary.find("N=3"), std::string::npos) << r.summary;
}

TEST(Tasks, RepeatedRunsAreBitIdentical) {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  auto c = preset("fleming-viot");
  run_task(Task::simulate, c, {.seed = 99, .out = a, .quick = true});
  run_task(Task::simulate, c, {.seed = 99, .out = b, .quick = true});
  EXPECT_EQ(slurp(a / "simulate.csv"), slurp(b / "simulate.csv"));
  const fs::path other = scratch("det-c");
  run_task(Task::simulate, c, {.seed = 100, .out = other, .quick = true});
  EXPECT_NE(slurp(a / "simulate.csv"), slurp(other / "simulate.csv"));
}

TEST(Tasks, MomentsArtifacts) {
  const fs::path dir = scratch("moments");
  const auto r = run_task(Task::moments, preset("fleming-viot"), {.out = dir});
  EXPECT_EQ(r.exit_code, 0);
  const auto rows = read_csv(dir / "moments.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[2][1], 0.5 * std::exp(-1.0), 1e-10);
  EXPECT_TRUE(fs::exists(dir / "moments.json"));
}

TEST(Binary, MalformedJsonExitsTwoWithoutArtifacts) {
  const fs::path dir = scratch("malformed");
  const auto cfg = write_file(dir / "bad.json", "{\"preset\": \"fleming-viot\",\n  \"k\": }\n");
  EXPECT_EQ(run_cli("moments --config " + cfg.string() + " --out " + (dir / "out").string(), dir / "log"), 2);
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_NE(slurp(dir / "log").find("bad.json:2:"), std::string::npos) << slurp(dir / "log");
}

TEST(Binary, UsageErrors) {
  const fs::path dir = scratch("usage");
  EXPECT_EQ(run_cli("", dir / "log"), 2);
  EXPECT_EQ(run_cli("frobnicate --preset fleming-viot", dir / "log"), 2);
  EXPECT_EQ(run_cli("moments --config " + (dir / "nope.json").string(), dir / "log"), 2);
  EXPECT_EQ(run_cli("moments --preset fleming-viot --seed abc", dir / "log"), 2);
}

TEST(Binary, MemoryGuardMessage) {
  const fs::path dir = scratch("bin-guard");
  const auto cfg = write_file(
      dir / "big.json",
      "{\"space\": {\"kind\": \"finite\", \"d\": 1000}, \"generator\": {\"alpha\": 1.0}, \"g\": {\"kind\": \"constant\"}, \"k\": 3, \"nu\": \"uniform\"}");
  EXPECT_EQ(run_cli("moments --config " + cfg.string() + " --out " + (dir / "out").string(), dir / "log"), 2);
  const std::string log = slurp(dir / "log");
  EXPECT_NE(log.find("167167000"), std::string::npos) << log;
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Binary, ValidateQuickPreset) {
  const fs::path dir = scratch("bin-validate");
  EXPECT_EQ(run_cli("validate --preset heterozygosity --quick --out " + dir.string(), dir / "log"), 0)
      << slurp(dir / "log");
  EXPECT_TRUE(fs::exists(dir / "validate.json"));
}
