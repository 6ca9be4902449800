#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corrlab/commands.hpp"

namespace fs = std::filesystem;
using corrlab::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell with stdout captured; stderr is discarded.
CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = (env.empty() ? std::string("env -u CORRLAB_CONFIG") : env) + " " +"\"" CORRLAB_CLI_PATH "\" " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config_path(const std::string& name) { return std::string(CORRLAB_CONFIG_DIR) + "/" + name; }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<double> column(const std::string& csv, std::size_t col) {
  std::vector<double> out;
  const auto ls = lines(csv);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    std::istringstream is(ls[i]);
    std::string cell;
    for (std::size_t c = 0; c <= col; ++c) std::getline(is, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("corrlab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kEvolveHeader = "t,mean_x,mean_p,var_x,var_p,mean_x2,corr,energy,covariance,uncert_lhs,uncert_rhs";

}  // namespace

TEST(Cli, EvolveCsvAndSummary) {
  TempDir tmp;
  const CliRun r = run("evolve -c " + config_path("evolve_chirp.ini") + " --json " + (tmp / "e.json").string());
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 42u);
  EXPECT_EQ(ls[0], kEvolveHeader);
  const json j = json::parse(slurp(tmp / "e.json"));
  EXPECT_NEAR(j["law25_slope"].get<double>(), 2.0 * j["initial"]["energy"].get<double>(), 1e-7);
  EXPECT_LE(j["law25_residual"].get<double>(), 1e-7);
  EXPECT_EQ(j["config"]["grid"]["n"], 1024);
  EXPECT_EQ(j["config"]["state"]["beta"], 1.0);
  EXPECT_EQ(j["shrink_spread"]["sign_changes"], 1);
  // 17 significant digits round-trip the stored doubles
  std::istringstream row(ls[1]);
  std::string cell;
  std::getline(row, cell, ',');
  std::getline(row, cell, ',');
  EXPECT_EQ(corrlab::format_double(std::stod(cell)), cell);
}

TEST(Cli, EvolveCoherentCorrelationNonnegative) {
  const CliRun r = run("evolve --beta 0");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out)[0], kEvolveHeader);
  for (double c : column(r.out, 6)) EXPECT_GE(c, -1e-9);
}

TEST(Cli, EvolveDeterministicAcrossRunsAndThreads) {
  TempDir tmp;
  const std::string base = "evolve -c " + config_path("evolve_chirp.ini");
  const CliRun a = run(base + " --json " + (tmp / "a.json").string());
  const CliRun b = run(base + " --json " + (tmp / "b.json").string());
  const CliRun c = run(base + " --threads 3 --json " + (tmp / "c.json").string());
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(slurp(tmp / "a.json"), slurp(tmp / "b.json"));
  EXPECT_EQ(slurp(tmp / "a.json"), slurp(tmp / "c.json"));
}

TEST(Cli, SpectrumUnitGaussian) {
  TempDir tmp;
  const CliRun r = run("spectrum -c " + config_path("spectrum_unit.ini") + " --threads 2 --json " +
                    (tmp / "s.json").string());
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  EXPECT_EQ(ls[0], "c,sigma_transform,sigma_matrix");
  EXPECT_EQ(ls.size(), 1025u);
  const json j = json::parse(slurp(tmp / "s.json"));
  EXPECT_NEAR(j["mean_transform"].get<double>(), 0.0, 0.02);
  EXPECT_NEAR(j["mean_matrix"].get<double>(), 0.0, 0.02);
  EXPECT_NEAR(j["total_transform"].get<double>(), 1.0, 0.01);
  EXPECT_NEAR(j["total_matrix"].get<double>(), 1.0, 0.01);
  EXPECT_LE(j["tv_distance"].get<double>(), 0.05);
  EXPECT_EQ(j["config"]["command"], "spectrum");
}

TEST(Cli, SpectrumChirpMean) {
  TempDir tmp;
  const CliRun r = run("spectrum --n 1024 --beta 1 --csv " + (tmp / "s.csv").string());
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["mean_transform"].get<double>(), -0.5, 0.02);
  EXPECT_NEAR(j["mean_matrix"].get<double>(), -0.5, 0.02);
  EXPECT_EQ(lines(slurp(tmp / "s.csv"))[0], "c,sigma_transform,sigma_matrix");
}

TEST(Cli, PauliReportRoundTrip) {
  TempDir tmp;
  const CliRun r = run("pauli -c " + config_path("pauli_chirp.ini") + " --trials 20 --threads 4 --json " +
                    (tmp / "p.json").string());
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(slurp(tmp / "p.json"));
  EXPECT_GE(j["partners_found"].size(), 1u);
  EXPECT_EQ(j["seeds"].size(), 20u);
  EXPECT_EQ(j["seeds"][0], 1);
  EXPECT_EQ(j["config"]["pauli"]["trials"], 20);
  const corrlab::PauliReportCheck check = corrlab::verify_pauli_report(j);
  EXPECT_GE(check.partners, 1u);
  EXPECT_TRUE(check.ok());
  for (const auto& p : j["partners_found"]) EXPECT_NEAR(p["delta_mean_c"].get<double>(), 1.0, 0.01);
}

TEST(Cli, PauliWithoutPartnersStillSucceeds) {
  const CliRun r = run("pauli --beta 0 --trials 5");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["partner_count"], 0);
  EXPECT_EQ(j["partners_found"].size(), 0u);
}

TEST(Cli, TransformAndMoments) {
  const CliRun t = run("transform --n 512 --set spectrum.c_points=256 --beta 0");
  ASSERT_EQ(t.code, 0);
  EXPECT_EQ(lines(t.out)[0], "c,amp_g_re,amp_g_im,amp_u_re,amp_u_im,sigma_g,sigma_u,sigma");
  const CliRun m = run("moments --beta 1");
  ASSERT_EQ(m.code, 0);
  const json j = json::parse(m.out);
  EXPECT_NEAR(j["moments"]["corr"].get<double>(), -0.5, 1e-8);
  EXPECT_NEAR(j["corr_matrix_route"].get<double>(), -0.5, 1e-8);
  EXPECT_TRUE(j["uncertainty"]["saturated"].get<bool>());
}

TEST(Cli, ConfigPrecedence) {
  TempDir tmp;
  write(tmp / "env.ini", "[state]\nbeta = 0.5\n");
  write(tmp / "file.ini", "[state]\nbeta = 0.25\n");
  const std::string env = "CORRLAB_CONFIG=" + (tmp / "env.ini").string();
  auto corr = [](const CliRun& r) { return json::parse(r.out)["moments"]["corr"].get<double>(); };
  EXPECT_NEAR(corr(run("moments")), -0.5, 1e-8) << "built-in default beta = 1";
  EXPECT_NEAR(corr(run("moments", env)), -0.25, 1e-8);
  EXPECT_NEAR(corr(run("moments -c " + (tmp / "file.ini").string(), env)), -0.125, 1e-8);
  EXPECT_NEAR(corr(run("moments --set state.beta=2", env)), -1.0, 1e-8);
  EXPECT_NEAR(corr(run("moments --set state.beta=2 --beta 3", env)), -1.5, 1e-8);
}

TEST(Cli, ConfigErrorsExitOne) {
  TempDir tmp;
  write(tmp / "bad.ini", "[state]\nbogus = 1\n");
  write(tmp / "badval.ini", "[grid]\nlength = wide\n");
  for (const std::string& args : {"moments -c " + (tmp / "bad.ini").string(), "moments -c " + (tmp / "badval.ini").string(),
                                  "moments -c " + (tmp / "missing.ini").string(), std::string("moments --set nosection=1"),
                                  std::string("moments --n 24"), std::string("moments --set spectrum.bins=7")}) {
    const CliRun r = run(args);
    EXPECT_EQ(r.code, 1) << args;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["error"]["kind"], "config") << args;
  }
}

TEST(Cli, PreconditionErrorsExitOne) {
  const CliRun r = run("moments --alpha 0.001");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["error"]["kind"], "support_violation");
  const CliRun e = run("evolve --n 512 --length 40 --set evolve.t_end=40");
  EXPECT_EQ(e.code, 1);
  const json j = json::parse(e.out);
  EXPECT_EQ(j["error"]["kind"], "support_violation");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("max admissible t"), std::string::npos);
}

TEST(Cli, CheckPassesAndTamperFails) {
  const CliRun ok = run("check --criterion 3 --criterion 4");
  ASSERT_EQ(ok.code, 0);
  const json j = json::parse(ok.out);
  ASSERT_EQ(j["criteria"].size(), 2u);
  EXPECT_TRUE(j["all_pass"].get<bool>());

  const CliRun bad = run("check --criterion 1 --set evolve.dispersion_scale=1.1");
  EXPECT_EQ(bad.code, 2);
  const json jb = json::parse(bad.out);
  EXPECT_FALSE(jb["criteria"][0]["pass"].get<bool>());
  EXPECT_EQ(jb["config"]["evolve"]["dispersion_scale"], 1.1);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("frobnicate").code, 0);
}
