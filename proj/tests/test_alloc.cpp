#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "savi/alloc.hpp"
#include "savi/verify.hpp"

namespace savi {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// SAVI_UPDATE_GOLDEN=1 rewrites the files instead of comparing
void expect_golden(const std::string& name, const std::string& text) {
  const std::string path = std::string(SAVI_GOLDEN_DIR) + "/" + name;
  if (std::getenv("SAVI_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << text;
    return;
  }
  std::ifstream probe(path);
  ASSERT_TRUE(probe.good()) << "missing golden " << path;
  EXPECT_EQ(read_file(path), text) << name;
}

CodecModel c1() { return CodecModel(make_codec(2, 2, 1.0, 7)); }

TEST(Allocation, FaviHasNoBitrateError) {
  const AllocationReport r = run_allocation(c1(), Method::Favi, suite_optim());
  EXPECT_EQ(r.bitrate_error, 0.0);
  EXPECT_EQ(r.method, "favi");
  EXPECT_EQ(r.counter.gradient_calls, 0);
}

TEST(Allocation, ZeroStepsMatchFavi) {
  OptimConfig c = suite_optim();
  c.K = 0;
  const CodecModel m = c1();
  const AllocationReport base = run_allocation(m, Method::Favi, c);
  for (Method method : {Method::Bao, Method::Approx, Method::Exact}) {
    const AllocationReport r = run_allocation(m, method, c);
    ASSERT_EQ(r.rows.size(), base.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      EXPECT_EQ(r.rows[i].R, base.rows[i].R);
      EXPECT_EQ(r.rows[i].D, base.rows[i].D);
      EXPECT_EQ(r.rows[i].L, base.rows[i].L);
    }
    EXPECT_EQ(r.bitrate_error, 0.0);
  }
}

TEST(Allocation, TotalsAreColumnSums) {
  for (const auto& s : codec_suite()) {
    const CodecModel m(make_codec(s.T, s.d, s.lambda0, s.seed));
    const AllocationReport r = run_allocation(m, Method::Approx, suite_optim());
    double R = 0.0, D = 0.0, L = 0.0;
    for (const auto& row : r.rows) {
      R += row.R;
      D += row.D;
      L += row.L;
      EXPECT_EQ(row.L, -(row.R + s.lambda0 * row.D));
    }
    EXPECT_NEAR(r.R, R, 1e-12);
    EXPECT_NEAR(r.D, D, 1e-12);
    EXPECT_NEAR(r.L, L, 1e-12);
    EXPECT_GE(r.bitrate_error, 0.0);
  }
}

TEST(Allocation, EveryMethodImprovesOnFavi) {
  for (const auto& s : codec_suite()) {
    const CodecModel m(make_codec(s.T, s.d, s.lambda0, s.seed));
    const double base = run_allocation(m, Method::Favi, suite_optim()).L;
    for (Method method : {Method::Bao, Method::Approx, Method::Exact}) {
      EXPECT_GE(run_allocation(m, method, suite_optim()).L, base) << s.name << " " << to_string(method);
    }
  }
}

TEST(Allocation, ExactGuard) {
  OptimConfig c;
  c.K = 3;
  EXPECT_THROW(run_allocation(CodecModel(make_codec(4, 2, 1.0, 7)), Method::Exact, c), GuardError);
  c.K = 4;
  EXPECT_THROW(run_allocation(CodecModel(make_codec(3, 2, 1.0, 7)), Method::Exact, c), GuardError);
  c.K = 3;
  EXPECT_NO_THROW(check_exact_guard(3, c));
  EXPECT_THROW(check_exact_guard_nodes(7, c), GuardError);
}

TEST(Allocation, TwoLevelIsNotAnAllocationMethod) {
  EXPECT_THROW(run_allocation(c1(), Method::TwoLevel, suite_optim()), ConfigError);
}

TEST(Allocation, CsvLayout) {
  const AllocationReport r = run_allocation(c1(), Method::Bao, suite_optim());
  const std::string csv = allocation_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "method,frame,R,D,L,bpp_like,steps");
  EXPECT_EQ(lines[1].rfind("bao,1,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("bao,TOTALS,", 0), 0u);
  EXPECT_EQ(lines[3].substr(lines[3].rfind(',') + 1), "40");
}

TEST(Allocation, SingleMethodComparisonIsItsReport) {
  const CodecModel m = c1();
  const auto reps = compare_methods(m, {Method::Approx}, suite_optim());
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_EQ(comparison_csv(reps), allocation_csv(run_allocation(m, Method::Approx, suite_optim())));
}

TEST(Allocation, MaskNames) {
  EXPECT_EQ(parse_mask("w-only"), Mask::WOnly);
  EXPECT_EQ(to_string(Mask::YOnly), "y-only");
  EXPECT_THROW(parse_mask("both"), ConfigError);
  EXPECT_EQ(frozen_nodes(Mask::WOnly, 2), (std::set<NodeId>{2, 4}));
  EXPECT_EQ(frozen_nodes(Mask::YOnly, 2), (std::set<NodeId>{1, 3}));
  EXPECT_TRUE(frozen_nodes(Mask::Joint, 2).empty());
}

TEST(Goldens, SuiteComparison) {
  for (const auto& s : codec_suite()) {
    const CodecModel m(make_codec(s.T, s.d, s.lambda0, s.seed));
    const auto reps = compare_methods(m, {Method::Favi, Method::Bao, Method::Approx, Method::Exact},
                                      suite_optim());
    expect_golden(s.name + "_comparison.csv", comparison_csv(reps));
  }
}

TEST(Goldens, SuiteAblation) {
  for (const auto& s : codec_suite()) {
    const CodecModel m(make_codec(s.T, s.d, s.lambda0, s.seed));
    std::string out = "method,mask,R,D,L\n";
    for (Method method : {Method::Approx, Method::Bao}) {
      for (Mask mask : {Mask::Joint, Mask::WOnly, Mask::YOnly}) {
        OptimConfig c = suite_optim();
        c.frozen = frozen_nodes(mask, s.T);
        const AllocationReport r = run_allocation(m, method, c);
        out += to_string(method) + "," + to_string(mask) + "," + format_double(r.R) + "," +
               format_double(r.D) + "," + format_double(r.L) + "\n";
      }
    }
    expect_golden(s.name + "_ablation.csv", out);
  }
}

}  // namespace
}  // namespace savi
