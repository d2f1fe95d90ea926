// End-to-end checks of the qcr binary: exit codes, output files, and
// determinism of repeated runs. The binary path comes from the build system.

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int status = -1;
  std::string out;
};

CmdResult run_cmd(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + QCR_BINARY + " " + args + " 2>&1";
  CmdResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/* Drop the "wrote ... in <dir>" trailer (paths differ between runs) and the
 * "sampled ..." acceptance line (a resumed run counts acceptance over its own
 * sweeps only); everything left must match bitwise. */
std::string numeric_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line))
    if (line.rfind("wrote ", 0) != 0 && line.rfind("sampled ", 0) != 0) kept += line + "\n";
  return kept;
}

fs::path write_config(const fs::path& dir, const char* name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

const char* kGaussianConfig = R"(
[model]
m = 1
a = 2
J = 0.1
h = 0.05
d = 1
L = 2
P = 8
c4 = 0

[mc]
sweeps = 600
thermalization = 200
measure_every = 2
chains = 2
seed = 12
)";

}  // namespace

TEST(Cli, GreenIntegralPrintsTheCubicConstantAndRejectsLowDimension) {
  const auto ok = run_cmd("green-integral d=3");
  ASSERT_EQ(ok.status, 0) << ok.out;
  EXPECT_NE(ok.out.find("W_3 = 0.50546"), std::string::npos) << ok.out;

  EXPECT_EQ(run_cmd("green-integral d=2").status, 2);
  EXPECT_EQ(run_cmd("green-integral pancake").status, 2);
}

TEST(Cli, CheckInfraredRefusesUncoupledModels) {
  const fs::path dir = fs::path(::testing::TempDir()) / "cli_ir0";
  fs::create_directories(dir);
  const auto cfg = write_config(dir, "free.ini", "[model]\nJ = 0\n");
  const auto r = run_cmd("check-infrared " + cfg.string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("J > 0"), std::string::npos) << r.out;
}

TEST(Cli, ConfigErrorsAreAllReportedWithExitTwo) {
  const fs::path dir = fs::path(::testing::TempDir()) / "cli_badcfg";
  fs::create_directories(dir);
  const auto cfg =
      write_config(dir, "bad.ini", "[model]\nP = 1\nturbo = on\n[mc]\nchains = 0\n");
  const auto r = run_cmd("report " + cfg.string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("P must be >= 2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("turbo"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("chains must be >= 1"), std::string::npos) << r.out;

  EXPECT_EQ(run_cmd("report " + (dir / "missing.ini").string()).status, 2);
}

TEST(Cli, RepeatedRunsProduceByteIdenticalArtifacts) {
  const fs::path dir = fs::path(::testing::TempDir()) / "cli_repeat";
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  const auto cfg = write_config(dir, "run.ini", kGaussianConfig);

  const auto ra = run_cmd("report " + cfg.string(), "QCR_OUTPUT_DIR=" + (dir / "a").string());
  const auto rb = run_cmd("report " + cfg.string(), "QCR_OUTPUT_DIR=" + (dir / "b").string());
  ASSERT_EQ(ra.status, 0) << ra.out;
  ASSERT_EQ(rb.status, 0) << rb.out;
  EXPECT_EQ(numeric_lines(ra.out), numeric_lines(rb.out));
  for (const char* name : {"observables.csv", "dhat.csv", "certificates.json"}) {
    const std::string a = slurp(dir / "a" / name);
    const std::string b = slurp(dir / "b" / name);
    ASSERT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, b) << name;
  }
  // every artifact opens with the same config hash and seed
  const std::string head = slurp(dir / "a" / "observables.csv").substr(0, 9);
  EXPECT_EQ(head, "# config ");
}

TEST(Cli, SampleWritesCheckpointAndResumeMatchesStraightRun) {
  const fs::path dir = fs::path(::testing::TempDir()) / "cli_resume";
  fs::create_directories(dir);
  const std::string base = kGaussianConfig;
  const auto cfg_short = write_config(dir, "short.ini", base);
  std::string longer = base;
  const auto pos = longer.find("sweeps = 600");
  ASSERT_NE(pos, std::string::npos);
  longer.replace(pos, 12, "sweeps = 900");
  const auto cfg_long = write_config(dir, "long.ini", longer);

  const std::string env_a = "QCR_OUTPUT_DIR=" + (dir / "staged").string();
  ASSERT_EQ(run_cmd("sample " + cfg_short.string(), env_a).status, 0);
  const std::string ck = (dir / "staged" / "checkpoint.bin").string();
  const auto resumed = run_cmd("sample " + cfg_long.string() + " --resume " + ck, env_a);
  ASSERT_EQ(resumed.status, 0) << resumed.out;

  const std::string env_b = "QCR_OUTPUT_DIR=" + (dir / "straight").string();
  const auto straight = run_cmd("sample " + cfg_long.string(), env_b);
  ASSERT_EQ(straight.status, 0) << straight.out;
  EXPECT_EQ(numeric_lines(resumed.out), numeric_lines(straight.out));

  // a second resume from the exhausted checkpoint is a usage error
  const std::string ck2 = (dir / "staged" / "checkpoint.bin").string();
  EXPECT_EQ(run_cmd("sample " + cfg_long.string() + " --resume " + ck2, env_a).status, 2);
  // and a checkpoint from different parameters is refused
  std::string reseeded = longer;
  const auto spos = reseeded.find("seed = 12");
  ASSERT_NE(spos, std::string::npos);
  reseeded.replace(spos, 9, "seed = 13");
  const auto cfg_seed = write_config(dir, "reseeded.ini", reseeded);
  const auto wrong = run_cmd("sample " + cfg_seed.string() + " --resume " + ck2, env_a);
  EXPECT_EQ(wrong.status, 2);
  EXPECT_NE(wrong.out.find("different parameters"), std::string::npos) << wrong.out;
}

TEST(Cli, ScanRequiresAGridAndWritesBothArtifacts) {
  const fs::path dir = fs::path(::testing::TempDir()) / "cli_scan";
  fs::create_directories(dir);
  const auto no_grid = write_config(dir, "nogrid.ini", kGaussianConfig);
  EXPECT_EQ(run_cmd("scan " + no_grid.string()).status, 2);

  std::string with_grid = kGaussianConfig;
  with_grid += "\n[scan]\nh_grid = -0.05,0,0.05\ndirection = up\n";
  const auto cfg = write_config(dir, "grid.ini", with_grid);
  const auto r = run_cmd("scan " + cfg.string(), "QCR_OUTPUT_DIR=" + (dir / "out").string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("monotonicity L=2 up: PASS"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "scan.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "transition.json"));
}

TEST(Cli, SelftestPassesAndUsageErrorsExitTwo) {
  const auto st = run_cmd("selftest");
  EXPECT_EQ(st.status, 0) << st.out;
  EXPECT_NE(st.out.find("all checks passed"), std::string::npos) << st.out;

  EXPECT_EQ(run_cmd("no-such-command").status, 2);
  EXPECT_EQ(run_cmd("").status, 2);
  EXPECT_EQ(run_cmd("--help").status, 0);
}

TEST(Cli, OracleEmitsExactTablesOnStdout) {
  const fs::path dir = fs::path(::testing::TempDir()) / "cli_oracle";
  fs::create_directories(dir);
  const auto cfg = write_config(dir, "osc.ini", "[model]\nm = 1\na = 1\nc4 = 0\n");
  const auto r = run_cmd("oracle " + cfg.string() + " --tau-points 3");
  ASSERT_EQ(r.status, 0) << r.out;
  // harmonic closed form: <q^2> = coth(1/2)/2 = 1.0819767...
  EXPECT_NE(r.out.find("q2,1.081976706869"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("tau,gamma"), std::string::npos) << r.out;
}
