#include <gtest/gtest.h>

#include <random>

#include "savi/codec_model.hpp"
#include "savi/diff.hpp"
#include "savi/quadratic_model.hpp"

namespace savi {
namespace {

Values single(Eigen::VectorXd v) {
  Values out(2);
  out[0] = Eigen::VectorXd();
  out[1] = std::move(v);
  return out;
}

Eigen::VectorXd random_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

TEST(GradFd, ConstantIsZero) {
  ScalarFn f = [](const Values&) { return 4.0; };
  EXPECT_EQ(grad_fd(f, single(Eigen::Vector2d(1, 2)), 1, {}).norm(), 0.0);
}

TEST(GradFd, HalfSquaredNorm) {
  ScalarFn f = [](const Values& v) { return 0.5 * v[1].squaredNorm(); };
  const Eigen::VectorXd g = grad_fd(f, single(Eigen::Vector2d(3, 4)), 1, {});
  EXPECT_NEAR(g[0], 3.0, 1e-8);
  EXPECT_NEAR(g[1], 4.0, 1e-8);
}

TEST(GradFd, NonFiniteIsReported) {
  ScalarFn f = [](const Values& v) { return std::log(v[1][0]); };
  EXPECT_THROW(grad_fd(f, single(Eigen::VectorXd::Zero(1)), 1, {}), NumericError);
}

TEST(GradFd, QuadraticMatchesAnalytic) {
  QuadraticModel q(quadratic_chain_q1());
  std::mt19937_64 rng(4);
  Values y = zero_values(q.dag());
  for (NodeId i = 1; i <= 3; ++i) y[i] = random_vec(rng, 2);
  ScalarFn f = [&](const Values& v) { return q.objective(v); };
  for (NodeId i = 1; i <= 3; ++i) EXPECT_LT(rel_error(grad_fd(f, y, i, {}), q.grad(y, i)), 1e-8);
}

TEST(HvpFd, IdentityHessian) {
  QuadraticSpec s;
  s.dag = make_edgeless(1, 2);
  s.A = Eigen::MatrixXd::Identity(2, 2);
  s.b = Eigen::VectorXd::Zero(2);
  s.c = zero_values(s.dag);
  QuadraticModel q(s);
  GradFn g = [&](const Values& v) { return q.grad_all(v); };
  const Eigen::VectorXd h = hvp_fd(g, favi_fill(q), 1, 1, Eigen::Vector2d(1, 0), {});
  EXPECT_NEAR(h[0], -1.0, 1e-8);
  EXPECT_NEAR(h[1], 0.0, 1e-8);
}

TEST(HvpFd, ZeroDirection) {
  QuadraticModel q(quadratic_chain_q1());
  GradFn g = [&](const Values& v) { return q.grad_all(v); };
  const Eigen::VectorXd h = hvp_fd(g, favi_fill(q), 1, 2, Eigen::VectorXd::Zero(2), {});
  EXPECT_EQ(h.norm(), 0.0);
}

TEST(HvpFd, CrossBlockMatchesA) {
  QuadraticModel q(quadratic_coupled_q3());
  const Eigen::MatrixXd& A = q.spec().A;
  GradFn g = [&](const Values& v) { return q.grad_all(v); };
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Values y = zero_values(q.dag());
    for (NodeId i = 1; i <= 3; ++i) y[i] = random_vec(rng, 2);
    const Eigen::VectorXd v = random_vec(rng, 2);
    for (FdScaling sc : {FdScaling::Relative, FdScaling::Absolute}) {
      FdConfig fd;
      fd.scaling = sc;
      const Eigen::VectorXd h = hvp_fd(g, y, 1, 3, v, fd);
      const Eigen::VectorXd want = -A.block(0, 4, 2, 2) * v;
      EXPECT_LT((h - want).norm(), 1e-6 * A.norm() * v.norm());
    }
  }
}

TEST(HvpFd, AllBlocksAgreeWithSingleBlock) {
  QuadraticModel q(quadratic_chain_q1());
  GradFn g = [&](const Values& v) { return q.grad_all(v); };
  const Values y = favi_fill(q);
  const Eigen::Vector2d v(0.5, -0.25);
  const Values all = hvp_fd_all(g, y, 2, v, {});
  for (NodeId out = 1; out <= 3; ++out) EXPECT_EQ(all[out], hvp_fd(g, y, out, 2, v, {}));
}

TEST(HvpFd, SymmetricOperatorOnDiagonalBlock) {
  QuadraticModel q(make_quadratic(make_chain(2, 3), {6, 1.0, 0.5}));
  GradFn g = [&](const Values& v) { return q.grad_all(v); };
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Values y = zero_values(q.dag());
    for (NodeId i = 1; i <= 2; ++i) y[i] = random_vec(rng, 3);
    const Eigen::VectorXd u = random_vec(rng, 3), v = random_vec(rng, 3);
    const double uv = u.dot(hvp_fd(g, y, 2, 2, v, {}));
    const double vu = v.dot(hvp_fd(g, y, 2, 2, u, {}));
    EXPECT_LT(std::abs(uv - vu), 1e-6 * std::max(std::abs(uv), std::abs(vu)));
  }
}

// on a quadratic the forward difference is exact, so the order check runs on the codec
TEST(HvpFd, ErrorIsFirstOrderInRadius) {
  std::mt19937_64 rng(21);
  int cases = 0;
  for (std::uint64_t seed : {7, 11, 13, 17, 19}) {
    CodecModel m(make_codec(2, 2, 1.0, seed));
    GradFn g = [&](const Values& v) { return m.grad_all(v); };
    const Values y = favi_fill(m);
    for (NodeId in = 1; in <= 4; ++in) {
      const Eigen::VectorXd v = random_vec(rng, 2);
      // reference: central difference with a small step
      const double eps = 1e-5;
      Values p = y, n = y;
      p[in] += eps * v;
      n[in] -= eps * v;
      const Values gp = g(p), gn = g(n);
      FdConfig big, half;
      big.scaling = half.scaling = FdScaling::Absolute;
      big.r = 1e-2;
      half.r = 5e-3;
      const Values hb = hvp_fd_all(g, y, in, v, big), hh = hvp_fd_all(g, y, in, v, half);
      double eb = 0.0, eh = 0.0;
      for (NodeId out = 1; out <= 4; ++out) {
        const Eigen::VectorXd ref = (gp[out] - gn[out]) / (2 * eps);
        eb = std::max(eb, (hb[out] - ref).lpNorm<Eigen::Infinity>());
        eh = std::max(eh, (hh[out] - ref).lpNorm<Eigen::Infinity>());
      }
      // first order: the ratio tends to 2, from either side
      EXPECT_NEAR(eb / eh, 2.0, 0.1) << "seed " << seed << " node " << in;
      ++cases;
    }
  }
  EXPECT_EQ(cases, 20);
}

TEST(GradCheck, QuadraticPasses) {
  const GradCheckReport r = grad_check(QuadraticModel(quadratic_chain_q1()), 10, 1e-5, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.trials, 10);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(GradCheck, FaultIsFlagged) {
  QuadraticModel q(quadratic_chain_q1());
  FaultyModel bad(q, 2, 1, 0.1);
  const GradCheckReport r = grad_check(bad, 10, 1e-5, 1);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_node, 2);
}

TEST(GradCheck, CodecPasses) {
  const GradCheckReport r = grad_check(CodecModel(make_codec(3, 2, 1.0, 7)), 10, 1e-4, 1);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(GradCheck, DeterministicUnderSeed) {
  CodecModel m(make_codec(2, 2, 1.0, 13));
  const GradCheckReport a = grad_check(m, 5, 1e-4, 3), b = grad_check(m, 5, 1e-4, 3);
  EXPECT_EQ(a.max_rel_error, b.max_rel_error);
  EXPECT_EQ(a.worst_node, b.worst_node);
}

TEST(FdConfig, Names) {
  EXPECT_EQ(parse_fd_scaling("absolute"), FdScaling::Absolute);
  EXPECT_EQ(to_string(FdScaling::Relative), "relative");
  EXPECT_THROW(parse_fd_scaling("log"), std::invalid_argument);
}

}  // namespace
}  // namespace savi
