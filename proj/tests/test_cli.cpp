#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ergodic/runner.hpp"

namespace fs = std::filesystem;
using namespace ergodic;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("ergodic_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    ::setenv("ERGODIC_OUTPUT_ROOT", root_.c_str(), 1);
  }
  void TearDown() override {
    ::unsetenv("ERGODIC_OUTPUT_ROOT");
    fs::remove_all(root_);
  }

  fs::path write_config(const std::string& name, const std::string& body) const {
    const fs::path p = root_ / name;
    std::ofstream(p) << body;
    return p;
  }

  // exit status of `ergodic <args>`, stdout and stderr captured in out_
  int cli(const std::string& args) {
    const fs::path log = root_ / "cli.log";
    const std::string cmd = std::string(ERGODIC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    out_ = slurp(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path root_;
  std::string out_;
};

const char* kSmallOu =
    "model = ou\n"
    "scheme = euler\n"
    "rng.seed = 99\n"
    "run.steps = 3000\n"
    "run.replicas = 2\n"
    "run.x0 = 0.3\n"
    "functionals.monomials = 2\n"
    "functionals.bumps = -0.5:0.8, 0.5:0.8\n"
    "functionals.generator = true\n"
    "reference = speed_measure\n";

}  // namespace

TEST_F(CliTest, SameSeedGivesIdenticalTraces) {
  const auto a = write_config("a.conf", std::string(kSmallOu) + "output.dir = a\n");
  const auto b = write_config("b.conf", std::string(kSmallOu) + "output.dir = b\n");
  ASSERT_EQ(cli("run " + a.string()), 0) << out_;
  ASSERT_EQ(cli("run " + b.string()), 0) << out_;
  const std::string ta = slurp(root_ / "a" / "trace.csv");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(root_ / "b" / "trace.csv"));
  EXPECT_EQ(slurp(root_ / "a" / "report.txt"), slurp(root_ / "b" / "report.txt"));
}

TEST_F(CliTest, ReplicasUseDisjointStreams) {
  const auto a = write_config("a.conf", std::string(kSmallOu) + "output.dir = a\n");
  ASSERT_EQ(cli("run " + a.string()), 0) << out_;
  std::ifstream in(root_ / "a" / "trace.csv");
  std::string line, last0, last1;
  while (std::getline(in, line)) {
    if (line.find(",x^2,") == std::string::npos || line.rfind("3000,", 0) != 0) continue;
    (line.back() == '0' ? last0 : last1) = line.substr(0, line.rfind(','));
  }
  ASSERT_FALSE(last0.empty());
  ASSERT_FALSE(last1.empty());
  EXPECT_NE(last0, last1);
}

TEST_F(CliTest, SingleStepTraceHoldsInitialPoint) {
  const auto c = write_config("one.conf",
                              "model = ou\nrun.steps = 1\nrun.replicas = 1\nrun.x0 = 0.7\ncheck = false\noutput.dir = one\n");
  ASSERT_EQ(cli("run " + c.string()), 0) << out_;
  EXPECT_EQ(slurp(root_ / "one" / "trace.csv"),
            "n,Gamma_n,H_n,label,nu_n_value,replica\n"
            "1,0.5,0.5,x,0.69999999999999996,0\n"
            "1,0.5,0.5,x^2,0.48999999999999994,0\n");
}

TEST_F(CliTest, TraceMatchesLibraryRerun) {
  const std::string body = std::string(kSmallOu) + "output.dir = lib\n";
  const auto c = write_config("lib.conf", body);
  ASSERT_EQ(cli("run " + c.string()), 0) << out_;

  std::istringstream is(body);
  const RunConfig cfg = parse_run_config(Config::parse(is));
  const RunSetup s = build_setup(cfg);
  std::ostringstream expect;
  write_trace_header(expect, true);
  for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
    const auto rep = run_replica(s, cfg, r);
    ASSERT_FALSE(rep.fault.has_value());
    write_trace_csv(expect, *rep.acc, false, static_cast<int>(r));
  }
  EXPECT_EQ(slurp(root_ / "lib" / "trace.csv"), expect.str());
}

TEST_F(CliTest, ReplayReproducesArtifacts) {
  const auto c = write_config("r.conf", std::string(kSmallOu) + "output.dir = first\n");
  ASSERT_EQ(cli("run " + c.string()), 0) << out_;
  const fs::path replay_dir = root_ / "second";
  ASSERT_EQ(cli("replay " + (root_ / "first" / "meta").string() + " -o " + replay_dir.string()), 0) << out_;
  EXPECT_EQ(slurp(root_ / "first" / "trace.csv"), slurp(replay_dir / "trace.csv"));
  EXPECT_EQ(slurp(root_ / "first" / "report.txt"), slurp(replay_dir / "report.txt"));
  EXPECT_EQ(slurp(root_ / "first" / "hypotheses.csv"), slurp(replay_dir / "hypotheses.csv"));
}

TEST_F(CliTest, MetaEchoesConfigAndStreams) {
  const auto c = write_config("m.conf", std::string(kSmallOu) + "output.dir = m\n");
  ASSERT_EQ(cli("run " + c.string()), 0) << out_;
  const std::string meta = slurp(root_ / "m" / "meta");
  EXPECT_NE(meta.find("rng.seed = 99\n"), std::string::npos);
  EXPECT_NE(meta.find("run.steps = 3000\n"), std::string::npos);
  EXPECT_NE(meta.find("meta.stream.0 = 0\n"), std::string::npos);
  EXPECT_NE(meta.find("meta.stream.1 = 1\n"), std::string::npos);
}

TEST_F(CliTest, ReportSections) {
  const auto c = write_config("s.conf", std::string(kSmallOu) + "output.dir = s\n");
  ASSERT_EQ(cli("run " + c.string()), 0) << out_;
  const std::string rep = slurp(root_ / "s" / "report.txt");
  EXPECT_NE(rep.find("functionals (mean over replicas, standard error)"), std::string::npos);
  EXPECT_NE(rep.find("x^2 = "), std::string::npos);
  EXPECT_NE(rep.find("W1 (coordinate 0)"), std::string::npos);
  EXPECT_NE(rep.find("generator residuals"), std::string::npos);
  EXPECT_NE(rep.find("R_p: holds"), std::string::npos);
  EXPECT_EQ(slurp(root_ / "s" / "hypotheses.csv").rfind("id,verdict,margin,argmin,parameters\n", 0), 0u);
}

TEST_F(CliTest, OutputOverrideFlag) {
  const auto c = write_config("o.conf", std::string(kSmallOu) + "output.dir = ignored\n");
  const fs::path dir = root_ / "explicit";
  ASSERT_EQ(cli("run " + c.string() + " --output " + dir.string()), 0) << out_;
  EXPECT_TRUE(fs::exists(dir / "trace.csv"));
  EXPECT_FALSE(fs::exists(root_ / "ignored"));
}

TEST_F(CliTest, CheckOuDefaultsHold) {
  ASSERT_EQ(cli(std::string("check ") + ERGODIC_CONFIG_DIR + "/ou_euler.conf"), 0) << out_;
  for (const char* id : {"L_V", "model", "B_phi", "R_p", "SW_I", "SW_II", "AVG_VAR", "exponents", "tightness"}) {
    EXPECT_NE(out_.find(std::string("  ") + id + ": holds"), std::string::npos) << id << "\n" << out_;
  }
  EXPECT_FALSE(fs::exists(root_ / "ou_euler"));
}

TEST_F(CliTest, CheckExponentialCaseHolds) {
  ASSERT_EQ(cli(std::string("check ") + ERGODIC_CONFIG_DIR + "/ou_exponential_check.conf"), 0) << out_;
  EXPECT_NE(out_.find("R_p_exp: holds"), std::string::npos) << out_;
}

TEST_F(CliTest, CheckZeroDriftFailsRp) {
  const auto c = write_config("z.conf", "model = ou\nmodel.theta = 0\n");
  EXPECT_EQ(cli("check " + c.string()), 1) << out_;
  EXPECT_NE(out_.find("R_p: fails"), std::string::npos) << out_;
}

TEST_F(CliTest, CheckFlagsDivergentStepSeries) {
  const auto c = write_config("k.conf", "model = ou\nstep.theta = 1\nweight = polynomial\nweight.eta1 = 1\nweight.kappa = 0\n");
  EXPECT_EQ(cli("check " + c.string()), 1) << out_;
  EXPECT_NE(out_.find("SW_I: fails"), std::string::npos) << out_;
  EXPECT_NE(out_.find("series diverges"), std::string::npos) << out_;
}

TEST_F(CliTest, JumpConfigChecks) {
  ASSERT_EQ(cli(std::string("check ") + ERGODIC_CONFIG_DIR + "/shot_noise.conf"), 0) << out_;
  EXPECT_NE(out_.find("R_pq: holds"), std::string::npos) << out_;
}

TEST_F(CliTest, BadConfigsExitTwo) {
  EXPECT_EQ(cli("run " + write_config("u.conf", "model = ou\nno.such.key = 1\n").string()), 2);
  EXPECT_NE(out_.find("unknown key 'no.such.key'"), std::string::npos) << out_;
  EXPECT_EQ(cli("run " + write_config("n.conf", "model = ou\nrun.steps = many\n").string()), 2);
  EXPECT_EQ(cli("run " + write_config("m.conf", "model = nope\n").string()), 2);
  EXPECT_NE(out_.find("unknown model 'nope'"), std::string::npos) << out_;
  EXPECT_EQ(cli("run " + write_config("s.conf", "model = ou\nrun.steps = 0\n").string()), 2);
  EXPECT_EQ(cli("check " + write_config("l.conf", "model = ou\nthis line has no equals\n").string()), 2);
  EXPECT_EQ(cli("run " + write_config("j.conf", "model = ou\nscheme = jump_euler\n").string()), 2);
}

TEST_F(CliTest, NumericFaultKeepsPartialArtifacts) {
  const auto c = write_config("f.conf",
                              "model = double_well\nstep.gamma1 = 5\nrun.x0 = 4\nrun.steps = 100\n"
                              "run.replicas = 2\ncheck = false\noutput.dir = fault\n");
  EXPECT_EQ(cli("run " + c.string()), 3) << out_;
  EXPECT_NE(out_.find("numeric fault"), std::string::npos);
  const std::string rep = slurp(root_ / "fault" / "report.txt");
  EXPECT_NE(rep.find("fault in replica 0: "), std::string::npos) << rep;
  EXPECT_NE(rep.find("at step 6"), std::string::npos) << rep;
  EXPECT_EQ(slurp(root_ / "fault" / "trace.csv").rfind("n,Gamma_n,H_n,label,nu_n_value,replica\n1,5,5,x,4,0\n", 0), 0u);
  EXPECT_TRUE(fs::exists(root_ / "fault" / "meta"));
}

TEST_F(CliTest, UsageErrorsAreNonzero) {
  EXPECT_NE(cli(""), 0);
  EXPECT_NE(cli("run " + (root_ / "missing.conf").string()), 0);
}
