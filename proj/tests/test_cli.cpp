#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "common.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(PILEUP_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buf;
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path tmp(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "pileup_cli_test";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(Cli, SolveFinite) {
  const auto out = tmp("finite.csv");
  const CliRun r = cli("solve-finite --potential wall --n 16 --out " + out.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(first_line(out), "i,x,eps,rho");
}

TEST(Cli, SolveBoundaryLayer) {
  const auto out = tmp("bl.csv");
  EXPECT_EQ(cli("solve-bl --potential powerlaw:a=3 --I 40 --J 50 --out " + out.string()).code, 0);
  EXPECT_EQ(first_line(out), "i,y,eps_l");
}

TEST(Cli, StressAndEnergy) {
  const auto st = tmp("stress.csv");
  EXPECT_EQ(cli("stress --n inf --imax 5 --out " + st.string()).code, 0);
  EXPECT_EQ(first_line(st), "i,sigma");
  EXPECT_EQ(cli("stress --n 12 --imax 5 --out " + st.string()).code, 0);
  EXPECT_EQ(cli("stress --n twelve --imax 5 --out " + st.string()).code, 1);

  const auto fin = tmp("strain.csv");
  ASSERT_EQ(cli("solve-finite --n 8 --out " + fin.string()).code, 0);
  const CliRun e = cli("energy --strain " + fin.string());
  EXPECT_EQ(e.code, 0);
  EXPECT_NE(e.out.find("direct"), std::string::npos);
  EXPECT_NE(e.out.find("q_part"), std::string::npos);
  EXPECT_NE(e.out.find("linear_part"), std::string::npos);
}

TEST(Cli, Predict) {
  const CliRun z = cli("predict --what zeta");
  EXPECT_EQ(z.code, 0);
  EXPECT_NE(z.out.find("1.64493406684823"), std::string::npos) << z.out;
  const CliRun b = cli("predict --potential powerlaw:a=1.5 --what bulk --s 0.25 --n 10000");
  EXPECT_NE(b.out.find("0.24945296438341"), std::string::npos) << b.out;
  EXPECT_EQ(cli("predict --potential wall --what zeta").code, 1);
  EXPECT_EQ(cli("predict --what nonsense").code, 1);
}

TEST(Cli, SweepAndErrors) {
  const auto out = tmp("sweep.csv");
  EXPECT_EQ(cli("sweep --n 16,32,64 --probes 1,3 --out " + out.string()).code, 0);
  EXPECT_EQ(first_line(out), "n,i,dn");
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("solve-finite --n 8").code, 1);
  EXPECT_EQ(cli("solve-finite --potential lennard-jones --n 8 --out " + out.string()).code, 1);
}

TEST(Cli, RunConfig) {
  const auto cfg = tmp("cfg.json");
  std::ofstream(cfg) << "{\"experiment\": \"stress-convergence\", \"n_values\": [16, 32, 64], \"out_dir\": \""
                     << tmp("run_out").string() << "\"}";
  EXPECT_EQ(cli("run " + cfg.string()).code, 0);
  EXPECT_TRUE(fs::exists(tmp("run_out") / "stress_gap.csv"));
  EXPECT_EQ(cli("run " + tmp("absent.json").string()).code, 1);
}

TEST(Cli, CheckSubset) {
  const CliRun r = cli("check --only 6");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos) << r.out;
}
