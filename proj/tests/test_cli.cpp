#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "savi/config.hpp"
#include "savi/verify.hpp"

namespace fs = std::filesystem;

namespace savi {
namespace {

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("savi_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::string& args, const fs::path& dir) {
  const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = std::string(SAVI_CLI) + " " + args + " > " + o.string() + " 2> " + e.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(o), read_file(e)};
}

std::string config(const std::string& name) { return std::string(SAVI_CONFIG_DIR) + "/" + name; }

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "test.ini";
  std::ofstream(p) << text;
  return p;
}

const char* kCodec = R"([model]
kind = codec
seed = 7
T = 2
d = 2
lambda0 = 1.0

[optim]
alpha = 0.1
K = 10

[run]
methods = "favi,bao,approx"
name = c1
)";

TEST(Config, ParsesCodec) {
  const ExperimentConfig c = parse_config(kCodec);
  EXPECT_EQ(c.kind, "codec");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.optim.K, 10);
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::Favi, Method::Bao, Method::Approx}));
}

TEST(Config, ParsesQuadraticAndOverrides) {
  const ExperimentConfig c = parse_config(R"(
[model]
kind = quadratic
seed = 3
[dag]
nodes = 3
edges = "1>2,2>3"
dims = "2,1,2"
[optim]
K.default = 400
K.node1 = 2000
hvp = fd
fd.r = 1e-3
fd.scaling = absolute
)");
  EXPECT_EQ(c.optim.K, 400);
  EXPECT_EQ(c.optim.K_override.at(1), 2000);
  EXPECT_EQ(c.optim.hvp, HvpMode::Fd);
  EXPECT_EQ(c.optim.fd.r, 1e-3);
  EXPECT_EQ(c.optim.fd.scaling, FdScaling::Absolute);
  const auto m = build_model(c);
  EXPECT_EQ(m->dag().dim(2), 1);
  EXPECT_TRUE(m->dag().has_edge(2, 3));
}

void expect_error(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
    FAIL() << "expected ConfigError for: " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(Config, StrictErrorsNameTheLine) {
  expect_error("[model]\nkind = codec\ncolour = red\n", "line 3");
  expect_error("[model]\nkind = codec\ncolour = red\n", "colour");
  expect_error("[extras]\n", "line 1");
  expect_error("[optim]\nalpha = fast\n", "line 2");
  expect_error("[optim]\nK = 2\nK.default = 3\n", "duplicate");
  expect_error("[optim]\nhvp = exact\n", "line 2");
  expect_error("[run]\nmethods = \"bao,magic\"\n", "magic");
  expect_error("alpha = 1\n", "outside");
  expect_error("[model]\nkind = codec\n[dag]\nnodes = 2\n", "[dag]");
  expect_error("[model]\nkind = quadratic\n[dag]\nnodes = 2\ndims = \"2\"\n", "dims");
  expect_error("[model]\nkind = quadratic\n[dag]\nnodes = 2\n[optim]\nK.node5 = 1\n", "K.node5");
  expect_error("[model]\nkind = codec\nT = 1\nevidence = \"0.1,2.0\"\n", "(-1, 1)");
}

TEST(Config, RejectsCycles) {
  EXPECT_THROW(parse_config("[model]\nkind = quadratic\n[dag]\nnodes = 2\nedges = \"1>2,2>1\"\n"),
               CycleError);
}

TEST(Config, RoundTrip) {
  for (const std::string text :
       {std::string(kCodec), read_file(config("q2_two_level.ini")), read_file(config("schedule.ini"))}) {
    const ExperimentConfig a = parse_config(text);
    const std::string once = serialize_config(a);
    const ExperimentConfig b = parse_config(once);
    EXPECT_EQ(once, serialize_config(b));
    EXPECT_EQ(a.kind, b.kind);
    EXPECT_EQ(a.optim.K_override, b.optim.K_override);
    EXPECT_EQ(a.optim.alpha, b.optim.alpha);
    EXPECT_EQ(a.methods, b.methods);
    EXPECT_EQ(a.optimize, b.optimize);
  }
}

TEST(Config, MaskFreezesNodes) {
  const ExperimentConfig m =
      parse_config("[model]\nkind = codec\nT = 2\n[optim]\noptimize = y-only\n");
  EXPECT_EQ(effective_optim(m).frozen, (std::set<NodeId>{1, 3}));
}

TEST(Cli, RunSuiteConfigWritesCsvs) {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, kCodec);
  const CliRun r = cli("run " + cfg.string() + " --out " + (dir / "o").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* m : {"favi", "bao", "approx"}) {
    EXPECT_TRUE(fs::exists(dir / "o" / (std::string("c1_") + m + ".csv"))) << m;
    EXPECT_TRUE(fs::exists(dir / "o" / (std::string("c1_") + m + ".trace"))) << m;
  }
  EXPECT_NE(r.out.find("approx"), std::string::npos);
  EXPECT_EQ(read_file(dir / "o" / "c1_approx.csv"),
            read_file(std::string(SAVI_GOLDEN_DIR) + "/c1_approx.csv"));
  EXPECT_EQ(read_file(dir / "o" / "c1_bao.csv"), read_file(std::string(SAVI_GOLDEN_DIR) + "/c1_bao.csv"));
  EXPECT_EQ(read_file(dir / "o" / "c1_favi.csv"), read_file(std::string(SAVI_GOLDEN_DIR) + "/c1_favi.csv"));
}

TEST(Cli, RunIsByteIdentical) {
  const fs::path dir = scratch("repeat");
  const CliRun a = cli("run " + config("suite/c2.ini") + " --out " + (dir / "a").string(), dir);
  const CliRun b = cli("run " + config("suite/c2.ini") + " --out " + (dir / "b").string(), dir);
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(read_file(entry.path()), read_file(dir / "b" / entry.path().filename()))
        << entry.path().filename();
  }
}

TEST(Cli, EmptyMethodListExitsTwo) {
  const fs::path dir = scratch("empty");
  const fs::path cfg = write_config(dir, "[model]\nkind = codec\n[run]\nmethods = \"\"\n");
  const CliRun r = cli("run " + cfg.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no methods selected"), std::string::npos);
}

TEST(Cli, ConfigErrorExitsTwoWithLine) {
  const fs::path dir = scratch("bad");
  const fs::path cfg = write_config(dir, "[model]\nkind = codec\nTT = 2\n");
  const CliRun r = cli("run " + cfg.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  EXPECT_NE(r.err.find("TT"), std::string::npos);
}

TEST(Cli, NumericFailureExitsThree) {
  const fs::path dir = scratch("nan");
  const fs::path cfg = write_config(
      dir, "[model]\nkind = quadratic\n[dag]\nnodes = 2\n[optim]\nalpha = 1e200\nK = 5\n[run]\nmethods = bao\n");
  const CliRun r = cli("run " + cfg.string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("event"), std::string::npos);
}

TEST(Cli, ZeroStepsMatchFavi) {
  const fs::path dir = scratch("k0");
  std::string text = kCodec;
  text.replace(text.find("K = 10"), 6, "K = 0");
  const fs::path cfg = write_config(dir, text);
  ASSERT_EQ(cli("run " + cfg.string() + " --out " + dir.string(), dir).code, 0);
  auto body = [&](const std::string& method) {
    std::string s = read_file(dir / ("c1_" + method + ".csv"));
    std::string out;
    std::istringstream in(s);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) out += line.substr(line.find(',')) + "\n";
    return out;
  };
  EXPECT_EQ(body("bao"), body("favi"));
  EXPECT_EQ(body("approx"), body("favi"));
}

TEST(Cli, SeedOverride) {
  const fs::path dir = scratch("seed");
  const fs::path cfg = write_config(dir, kCodec);
  ASSERT_EQ(cli("run " + cfg.string() + " --out " + (dir / "a").string() + " --seed 11", dir).code, 0);
  ASSERT_EQ(cli("run " + config("suite/c2.ini") + " --out " + (dir / "b").string(), dir).code, 0);
  EXPECT_EQ(read_file(dir / "a" / "c1_bao.csv"), read_file(dir / "b" / "c2_bao.csv"));
}

TEST(Cli, TraceSingleNode) {
  const fs::path dir = scratch("trace1");
  ASSERT_EQ(cli("trace " + config("trace_single.ini") + " --out " + dir.string(), dir).code, 0);
  const std::string t = read_file(dir / "single_exact.trace");
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 3);
  EXPECT_EQ(t.rfind("E 1 init node=1 k=(0) L=", 0), 0u);
}

TEST(Cli, TraceChainOfTwo) {
  const fs::path dir = scratch("trace2");
  ASSERT_EQ(cli("trace " + config("trace_chain2.ini") + " --out " + dir.string(), dir).code, 0);
  const std::string t = read_file(dir / "chain2_exact.trace");
  // 1 init of node 1, and per step of node 1: one init and K steps of node 2, then the step itself
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 1 + 2 * (1 + 2 + 1));
}

TEST(Cli, TraceChainOfThreeGolden) {
  const fs::path dir = scratch("trace3");
  ASSERT_EQ(cli("trace " + config("trace_chain3.ini") + " --out " + dir.string(), dir).code, 0);
  EXPECT_EQ(read_file(dir / "chain3_exact.trace"),
            read_file(std::string(SAVI_GOLDEN_DIR) + "/chain3_exact.trace"));
}

TEST(Cli, TraceGuardExitsTwo) {
  const fs::path dir = scratch("guard");
  const fs::path cfg = write_config(dir, "[model]\nkind = codec\nT = 3\n[optim]\nK = 10\n");
  const CliRun r = cli("trace " + cfg.string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("exact method"), std::string::npos);
}

TEST(Cli, VerifyComplexityPasses) {
  const fs::path dir = scratch("verify");
  const CliRun r = cli("verify complexity", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("measured=75 predicted=75"), std::string::npos);
}

TEST(Cli, VerifyWithInjectedFaultFails) {
  const fs::path dir = scratch("fault");
  const CliRun r = cli("--inject-fault verify thm1", dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("seed="), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  const fs::path dir = scratch("gc");
  EXPECT_EQ(cli("gradcheck " + config("suite/c3.ini"), dir).code, 0);
  EXPECT_EQ(cli("--inject-fault gradcheck " + config("q1_chain.ini"), dir).code, 1);
}

}  // namespace
}  // namespace savi
