#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spdreg/spdreg.hpp"

namespace spdreg {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spdreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  CliRun run(const std::string& args) const {
    const std::string out = p("stdout.txt"), err = p("stderr.txt");
    const std::string cmd = std::string(SPDREG_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  // staircase.dtf, staircase_noisy.dtf in dir_
  void generate(double sigma2 = 40.0) const {
    ASSERT_EQ(run("generate --phantom staircase --n 10 --sigma2 " + std::to_string(sigma2) + " --seed 7 --out-dir " +
                  dir_.string())
                  .code,
              0);
  }

  fs::path dir_;
};

TEST_F(Cli, GenerateWritesThreeDeterministicFiles) {
  generate();
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir_))
    if (e.path().filename().string().rfind("staircase", 0) == 0) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"staircase.dtf", "staircase.json", "staircase_noisy.dtf"}));
  const std::string noisy = slurp(p("staircase_noisy.dtf")), prov = slurp(p("staircase.json"));
  generate();
  EXPECT_EQ(slurp(p("staircase_noisy.dtf")), noisy);
  EXPECT_EQ(slurp(p("staircase.json")), prov);
  const auto j = nlohmann::json::parse(prov);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["sigma2"], 40.0);
}

TEST_F(Cli, GenerateWithoutNoiseReproducesPhantom) {
  generate(0.0);
  const TensorField a = read_dtf_file(p("staircase.dtf")), b = read_dtf_file(p("staircase_noisy.dtf"));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(a[i].mat().coeffs()[k], b[i].mat().coeffs()[k], 1e-8);
}

TEST_F(Cli, InvalidPhantomIsUsageError) {
  const CliRun r = run("generate --phantom spiral");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--phantom"), std::string::npos);
}

TEST_F(Cli, DenoiseReportIsNonIncreasing) {
  generate();
  const CliRun r = run("denoise --input " + p("staircase_noisy.dtf") + " --output " + p("den.dtf") +
                    " --alpha 1 --p 1.1 --s 0.5 --nrho 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(p("den.dtf.json")));
  const auto traj = j["objective_trajectory"].get<std::vector<double>>();
  ASSERT_GE(traj.size(), 2u);
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_LE(traj[i], traj[i - 1]);
  EXPECT_TRUE(j["seconds"].is_null());
  for (const char* key : {"iterations", "objective_trajectory", "final_objective", "converged", "seconds"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(Cli, AlphaZeroReturnsInput) {
  generate();
  ASSERT_EQ(run("denoise --input " + p("staircase_noisy.dtf") + " --output " + p("out.dtf") + " --alpha 0").code, 0);
  EXPECT_EQ(slurp(p("out.dtf")), slurp(p("staircase_noisy.dtf")));
}

TEST_F(Cli, InpaintWithFullMaskEqualsDenoise) {
  generate();
  write_mask_file(p("full.msk"), Mask(10, 10));
  const std::string common = " --input " + p("staircase_noisy.dtf") + " --alpha 0.5 --max-iters 20";
  ASSERT_EQ(run("denoise" + common + " --output " + p("a.dtf")).code, 0);
  ASSERT_EQ(run("inpaint" + common + " --mask " + p("full.msk") + " --output " + p("b.dtf")).code, 0);
  EXPECT_EQ(slurp(p("a.dtf")), slurp(p("b.dtf")));
}

TEST_F(Cli, MaskShapeMismatchIsUsageError) {
  generate();
  write_mask_file(p("small.msk"), Mask(4, 4));
  const CliRun r =
      run("inpaint --input " + p("staircase_noisy.dtf") + " --mask " + p("small.msk") + " --output " + p("x.dtf"));
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, EvaluateSnrAndProfile) {
  generate();
  CliRun r = run("evaluate --reference " + p("staircase.dtf") + " --candidate " + p("staircase.dtf"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("snr inf"), std::string::npos);

  ASSERT_EQ(run("denoise --input " + p("staircase_noisy.dtf") + " --output " + p("den.dtf")).code, 0);
  auto snr_of = [&](const std::string& cand) {
    const CliRun e = run("evaluate --reference " + p("staircase.dtf") + " --candidate " + cand + " --profile " +
                      p("profile.csv"));
    std::smatch m;
    EXPECT_TRUE(std::regex_search(e.out, m, std::regex("snr ([0-9.e+-]+)")));
    return std::stod(m[1]);
  };
  const double noisy = snr_of(p("staircase_noisy.dtf"));
  const double denoised = snr_of(p("den.dtf"));
  EXPECT_GT(denoised, noisy);
  const std::string csv = slurp(p("profile.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "column,largest_eigenvalue");
}

TEST_F(Cli, RenderGlyphCountAndDeterminism) {
  generate();
  ASSERT_EQ(run("render --input " + p("staircase.dtf") + " --output " + p("a.svg")).code, 0);
  ASSERT_EQ(run("render --input " + p("staircase.dtf") + " --output " + p("b.svg")).code, 0);
  const std::string svg = slurp(p("a.svg"));
  EXPECT_EQ(svg, slurp(p("b.svg")));
  const std::regex ellipse("<ellipse ");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), ellipse), std::sregex_iterator()), 100);
}

TEST_F(Cli, MalformedHeaderNamesLine) {
  std::ofstream(p("bad.dtf")) << "DTF9 1 1 3 36\n1 1 1 0 0 0\n";
  const CliRun r = run("render --input " + p("bad.dtf") + " --output " + p("x.svg"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingInputIsNonzero) {
  EXPECT_NE(run("render --input " + p("nope.dtf") + " --output " + p("x.svg")).code, 0);
}

TEST_F(Cli, ConfigFileAndOverrides) {
  generate();
  std::ofstream(p("run.cfg")) << "# denoise settings\nalpha = 0\nobjective = \"loglog\"\nreport-timing = false\n";
  ASSERT_EQ(run("denoise --config " + p("run.cfg") + " --input " + p("staircase_noisy.dtf") + " --output " +
                p("c.dtf"))
                .code,
            0);
  EXPECT_EQ(slurp(p("c.dtf")), slurp(p("staircase_noisy.dtf")));
  EXPECT_EQ(nlohmann::json::parse(slurp(p("c.dtf.json")))["params"]["alpha"], 0.0);

  ASSERT_EQ(run("denoise --config " + p("run.cfg") + " --alpha 1 --max-iters 3 --input " + p("staircase_noisy.dtf") +
                " --output " + p("d.dtf"))
                .code,
            0);
  EXPECT_EQ(nlohmann::json::parse(slurp(p("d.dtf.json")))["params"]["alpha"], 1.0);

  std::ofstream(p("bad.cfg")) << "alpha = 1\nlambda = 3\n";
  const CliRun r = run("denoise --config " + p("bad.cfg") + " --input " + p("staircase_noisy.dtf") + " --output " +
                    p("e.dtf"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("lambda"), std::string::npos);
}

TEST_F(Cli, SweepWritesOneRunPerValue) {
  generate();
  ASSERT_EQ(run("denoise --input " + p("staircase_noisy.dtf") + " --output " + p("s.dtf") +
                " --max-iters 5 --sweep alpha=0,0.5")
                .code,
            0);
  EXPECT_TRUE(fs::exists(p("s.alpha0.dtf")));
  EXPECT_TRUE(fs::exists(p("s.alpha0.5.dtf")));
  EXPECT_TRUE(fs::exists(p("s.dtf.alpha0.5.json")));
  EXPECT_EQ(slurp(p("s.alpha0.dtf")), slurp(p("staircase_noisy.dtf")));
  EXPECT_EQ(run("denoise --input " + p("staircase_noisy.dtf") + " --output " + p("s.dtf") + " --sweep gamma=1").code,
            2);
}

TEST_F(Cli, ThreadsDoNotChangeOutput) {
  generate();
  const std::string base = "denoise --input " + p("staircase_noisy.dtf") + " --max-iters 10";
  ASSERT_EQ(run(base + " --threads 1 --output " + p("t1.dtf")).code, 0);
  ASSERT_EQ(run(base + " --threads 3 --output " + p("t3.dtf")).code, 0);
  EXPECT_EQ(slurp(p("t1.dtf")), slurp(p("t3.dtf")));
}

TEST_F(Cli, StudyCsv) {
  const CliRun r = run("study --n 6 --deltas 30,3,0 --seeds 1 --nrho 2 --max-iters 30");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "delta,alpha,distance");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
}

}  // namespace
}  // namespace spdreg
