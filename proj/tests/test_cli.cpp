#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cubevar/cli.hpp"

using namespace cubevar;
using namespace cubevar::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cubevar_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_quiet(const RunSpec& spec, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int rc = run(spec, o, e);
  if (out) *out = o.str();
  return rc;
}

}  // namespace

TEST(Config, ParsesEveryKey) {
  const ExperimentConfig c = parse_config_text(
      "# comment\n"
      "n_list = 4, 6,8\n"
      "r_list = 1.5\n"
      "q = 1   # trailing comment\n"
      "\n"
      "rule = log\n"
      "alpha = 2\n"
      "seed = 18446744073709551615\n"
      "trials = 7\n");
  EXPECT_EQ(c.n_list, (std::vector<int>{4, 6, 8}));
  EXPECT_EQ(c.r_list, (std::vector<double>{1.5}));
  EXPECT_EQ(c.q, 1);
  EXPECT_EQ(c.rule.kind, TruncationRule::Kind::logarithmic);
  EXPECT_EQ(c.rule.alpha, 2.0);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_EQ(c.trials, 7);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config_text("n_list = 4\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  try {
    parse_config_text("\n\nr_list = 2x\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_config_text("n_list 4\n"), ConfigError);
  EXPECT_THROW(parse_config_text("q = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("/nonexistent/cubevar.cfg"), ConfigError);
}

TEST(Run, ExitCodes) {
  const fs::path dir = scratch("codes");
  RunSpec spec;
  spec.output_dir = dir.string();
  spec.command = "nope";
  EXPECT_EQ(run_quiet(spec), 2);
  spec.command = "verify";
  spec.overrides = {{"n_list", "0"}};
  EXPECT_EQ(run_quiet(spec), 2);
  spec.overrides = {{"n_list", "27"}};
  EXPECT_EQ(run_quiet(spec), 2);
  spec.command = "counterexample";
  spec.kind = "sideways";
  spec.overrides = {{"n_list", "6"}};
  EXPECT_EQ(run_quiet(spec), 2);
  spec.command = "verify";
  spec.overrides = {{"n_list", "6"}, {"trials", "20"}};
  EXPECT_EQ(run_quiet(spec), 0);
}

TEST(Run, WritesFilesAndSummary) {
  const fs::path dir = scratch("files");
  RunSpec spec;
  spec.command = "parity-scan";
  spec.output_dir = dir.string();
  spec.overrides = {{"n_list", "6"}, {"r_list", "3"}, {"q", "0"}};
  std::string out;
  ASSERT_EQ(run_quiet(spec, &out), 0);
  EXPECT_TRUE(fs::exists(dir / "parity-scan.json"));
  EXPECT_TRUE(fs::exists(dir / "parity-scan.csv"));
  EXPECT_NE(out.find("parity_character_max=2"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "parity-scan.json"));
  EXPECT_EQ(j.at("parameters").at("q"), 0);
  EXPECT_EQ(j.at("records").size(), 3u);
}

TEST(Run, KrawTableCsv) {
  const fs::path dir = scratch("kraw");
  RunSpec spec;
  spec.command = "kraw-table";
  spec.output_dir = dir.string();
  spec.format = Format::csv;
  spec.overrides = {{"n_list", "4"}};
  ASSERT_EQ(run_quiet(spec), 0);
  const std::string csv = slurp(dir / "kraw-table.csv");
  EXPECT_NE(csv.find("\n4,2,2,-1,3,-0.3333333333333333\n"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "kraw-table.json"));
}

TEST(Run, CsvIsDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  RunSpec spec;
  spec.command = "half-spectrum";
  spec.format = Format::csv;
  spec.overrides = {{"n_list", "6,7"}, {"trials", "4"}, {"seed", "99"}};
  spec.output_dir = a.string();
  ASSERT_EQ(run_quiet(spec), 0);
  spec.threads = 3;
  spec.output_dir = b.string();
  ASSERT_EQ(run_quiet(spec), 0);
  EXPECT_EQ(slurp(a / "half-spectrum.csv"), slurp(b / "half-spectrum.csv"));
}

TEST(Run, ConfigFileThenOverrides) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "n_list = 5\nr_list = 1\n";
  }
  RunSpec spec;
  spec.command = "counterexample";
  spec.config_path = (dir / "run.cfg").string();
  spec.overrides = {{"r_list", "2"}};
  spec.output_dir = dir.string();
  std::string out;
  ASSERT_EQ(run_quiet(spec, &out), 0);
  EXPECT_NE(out.find("n=5 r=2 "), std::string::npos);
  EXPECT_EQ(out.find("r=1 "), std::string::npos);
}

TEST(Threads, EnvFallback) {
  EXPECT_EQ(resolve_threads(3), 3u);
  ::setenv("CUBEVAR_THREADS", "5", 1);
  EXPECT_EQ(resolve_threads(0), 5u);
  ::unsetenv("CUBEVAR_THREADS");
  EXPECT_GE(resolve_threads(0), 1u);
}

TEST(Binary, KrawTableToStdoutFiles) {
  const fs::path dir = scratch("bin");
  const std::string cmd = std::string(CUBEVAR_CLI_PATH) + " kraw-table --n 4 --format csv --out " + dir.string() +
                          " > " + (dir.string() + ".log") + " 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const std::string csv = slurp(dir / "kraw-table.csv");
  int rows = -1;  // header
  for (char c : csv) rows += c == '\n';
  EXPECT_EQ(rows, 25);
  const std::string bad = std::string(CUBEVAR_CLI_PATH) + " verify --n 0 --out " + dir.string() + " > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
