#include "savi/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <random>

#include <Eigen/Eigenvalues>

#include <fmt/format.h>

#include "savi/quadratic_model.hpp"

namespace savi {

namespace {

using Clock = std::chrono::steady_clock;

class Suite {
 public:
  explicit Suite(std::string name) : start_(Clock::now()) { r_.name = std::move(name); }

  void record(bool ok, const std::string& line, double err = 0.0) {
    r_.lines.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", line));
    if (err > r_.max_error) r_.max_error = err;
    if (!ok && r_.passed) {
      r_.passed = false;
      r_.failure = line;
    }
  }

  void note(const std::string& line) { r_.lines.push_back(line); }

  SuiteResult done() {
    r_.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return r_;
  }

 private:
  SuiteResult r_;
  Clock::time_point start_;
};

// the model under test, optionally with one corrupted gradient coordinate
struct Subject {
  Subject(const Model& m, bool fault) : base(m) {
    if (fault) faulty = std::make_unique<FaultyModel>(m, 1, 0);
  }
  const Model& get() const { return faulty ? *faulty : base; }

  const Model& base;
  std::unique_ptr<FaultyModel> faulty;
};

Values perturbed(const Model& m, std::mt19937_64& rng, double sd) {
  Values s = favi_fill(m);
  std::normal_distribution<double> nd(0.0, sd);
  for (std::size_t i = 1; i < s.size(); ++i) {
    for (Eigen::Index k = 0; k < s[i].size(); ++k) s[i][k] += nd(rng);
  }
  return s;
}

bool same_bits(const Values& a, const Values& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    if (a[i].size() > 0 &&
        std::memcmp(a[i].data(), b[i].data(), sizeof(double) * a[i].size()) != 0) {
      return false;
    }
  }
  return true;
}

bool non_decreasing(const std::vector<double>& t, double* worst) {
  bool ok = true;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < t[i - 1]) {
      ok = false;
      *worst = std::max(*worst, t[i - 1] - t[i]);
    }
  }
  return ok;
}

std::string vec(const Eigen::VectorXd& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + ")";
}

// Largest step for which each of approx's per-node ascents is safe: node p
// ascends L composed with the linear initializer of every later node.
double approx_safe_alpha(const QuadraticModel& q) {
  const LatentDag& dag = q.dag();
  const auto order = topo_sort(dag);
  std::vector<int> pos(dag.node_count() + 1, 0);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  const Eigen::MatrixXd& A = q.spec().A;
  double lam = 0.0;
  for (NodeId p : order) {
    Eigen::MatrixXd J(A.rows(), dag.dim(p));
    for (int k = 0; k < dag.dim(p); ++k) {
      Values s = zero_values(dag);
      s[p][k] = 1.0;
      for (NodeId j : order) {
        if (pos[j] <= pos[p]) continue;
        for (NodeId i : dag.parents(j)) {
          if (pos[i] >= pos[p]) s[j] += q.spec().C.at({i, j}) * s[i];
        }
      }
      J.col(k) = q.flatten(s);
    }
    const Eigen::MatrixXd H = J.transpose() * A * J;
    lam = std::max(lam, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().maxCoeff());
  }
  return 1.0 / lam;
}

CodecModel suite_model(const SuiteSpec& s) {
  return CodecModel(make_codec(s.T, s.d, s.lambda0, s.seed));
}

}  // namespace

long chain_exact_grads(int n, int K, bool fd) {
  if (n < 1) return 0;
  std::vector<long> hg(n), rv(n, 0);
  auto hv = [&](int s) -> long { return s == 0 ? (fd ? 1 : 0) : hg[s]; };
  hg[0] = 1;
  for (int m = 1; m < n; ++m) {
    rv[m] = K * hv(m - 1) + (m - 1 >= 1 ? rv[m - 1] : 0);
    hg[m] = K * hg[m - 1] + 1 + rv[m];
  }
  return K * hg[n - 1];
}

long chain_approx_grads(int n, int K) { return static_cast<long>(n) * K; }

long chain_approx_favi(int n, int K) {
  long total = 0;
  for (int p = 0; p < n; ++p) total += (n - p) + static_cast<long>(K) * (n - p - 1);
  return total;
}

long chain_approx_jacobians(int n, int K) { return static_cast<long>(K) * n * (n - 1) / 2; }

const std::vector<SuiteSpec>& codec_suite() {
  static const std::vector<SuiteSpec> suite = {
      {"c1", 2, 2, 1.0, 7}, {"c2", 2, 2, 1.0, 11}, {"c3", 2, 2, 1.0, 13},
      {"c4", 2, 2, 1.0, 17}, {"c5", 2, 2, 1.0, 19},
  };
  return suite;
}

OptimConfig suite_optim() {
  OptimConfig c;
  c.K = 10;
  c.alpha = 0.1;
  return c;
}

SuiteResult verify_thm1(const VerifyOptions& opt) {
  Suite suite("thm1");
  std::mt19937_64 rng(2024);
  double worst_a = 0.0, worst_f = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::uint64_t seed = 1000 + t;
    const int dw = 1 + static_cast<int>(rng() % 4);
    const int dy = 1 + static_cast<int>(rng() % 4);
    QuadraticModel q(make_quadratic(LatentDag({dw, dy}, {{1, 2}}), {seed, 1.0, 0.5}));
    Subject m(q, opt.inject_fault);
    OptimConfig c;
    c.K = 1 + static_cast<int>(rng() % 8);
    c.alpha = 0.2 / q.lambda_max() * std::uniform_real_distribution<double>(0.25, 1.0)(rng);
    const Values s = perturbed(q, rng, 0.5);

    const Eigen::VectorXd o = oracle_outer_grad(m.get(), s, 1, c);
    c.hvp = HvpMode::Analytic;
    const Eigen::VectorXd a = grad_2_level(m.get(), s[1], c).grad;
    c.hvp = HvpMode::Fd;
    const Eigen::VectorXd f = grad_2_level(m.get(), s[1], c).grad;
    const double ea = rel_error(a, o), ef = rel_error(f, o);
    worst_a = std::max(worst_a, ea);
    worst_f = std::max(worst_f, ef);
    const bool ok = ea < 1e-5 && ef < 1e-3;
    suite.record(ok,
                 fmt::format("seed={} dims=({},{}) K={} alpha={:.4g} analytic={:.3e} fd={:.3e}{}",
                             seed, dw, dy, c.K, c.alpha, ea, ef,
                             ok ? "" : fmt::format(" grad={} oracle={}", vec(a), vec(o))),
                 ea);
  }
  suite.record(worst_a < 1e-5 && worst_f < 1e-3,
               fmt::format("max analytic={:.3e} (< 1e-5) fd={:.3e} (< 1e-3)", worst_a, worst_f));
  return suite.done();
}

SuiteResult verify_thm2(const VerifyOptions& opt) {
  Suite suite("thm2");
  std::mt19937_64 rng(5);
  double worst_a = 0.0, worst_f = 0.0;
  for (int t = 0; t < 30; ++t) {
    const std::uint64_t seed = 100 + t;
    const int n = 2 + static_cast<int>(rng() % 3);
    std::vector<Edge> edges;
    for (int i = 1; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        if (rng() % 2) edges.push_back({i, j});
      }
    }
    if (edges.empty()) edges.push_back({1, 2});
    std::vector<int> dims(n);
    for (auto& d : dims) d = 1 + static_cast<int>(rng() % 2);
    QuadraticModel q(make_quadratic(LatentDag(dims, edges), {seed, 1.0, 0.5}));
    Subject m(q, opt.inject_fault);
    OptimConfig c;
    c.K = 1 + static_cast<int>(rng() % 3);
    c.alpha = 0.2 / q.lambda_max();
    const Values s = perturbed(q, rng, 0.5);

    double ea = 0.0, ef = 0.0;
    std::string bad;
    for (NodeId i = 1; i <= n; ++i) {
      const Eigen::VectorXd o = oracle_outer_grad(m.get(), s, i, c);
      c.hvp = HvpMode::Analytic;
      const Eigen::VectorXd a = grad_dag(m.get(), s, i, c);
      c.hvp = HvpMode::Fd;
      const Eigen::VectorXd f = grad_dag(m.get(), s, i, c);
      c.hvp = HvpMode::Auto;
      const double e1 = rel_error(a, o), e2 = rel_error(f, o);
      if ((e1 >= 1e-6 || e2 >= 1e-4) && bad.empty()) {
        bad = fmt::format(" node={} grad={} oracle={}", i, vec(a), vec(o));
      }
      ea = std::max(ea, e1);
      ef = std::max(ef, e2);
    }
    worst_a = std::max(worst_a, ea);
    worst_f = std::max(worst_f, ef);
    suite.record(bad.empty(),
                 fmt::format("seed={} N={} edges={} K={} analytic={:.3e} fd={:.3e}{}", seed, n,
                             format_edges(edges), c.K, ea, ef, bad),
                 ea);
  }
  suite.record(worst_a < 1e-6 && worst_f < 1e-4,
               fmt::format("max analytic={:.3e} (< 1e-6) fd={:.3e} (< 1e-4)", worst_a, worst_f));
  return suite.done();
}

SuiteResult verify_complexity(const VerifyOptions&) {
  Suite suite("complexity");
  const std::vector<std::pair<int, int>> grid = {{2, 2}, {2, 4}, {3, 2}, {3, 3}};
  for (auto [N, K] : grid) {
    QuadraticModel q(make_quadratic(make_chain(N, 2), {1, 1.0, 0.5}));
    OptimConfig c;
    c.K = K;
    for (HvpMode mode : {HvpMode::Analytic, HvpMode::Fd}) {
      c.hvp = mode;
      const long got = solve_dag(q, c).counter.gradient_calls;
      const long want = chain_exact_grads(N, K, mode == HvpMode::Fd);
      const double floor = std::pow(K, N - 1);
      suite.record(got == want && got >= floor,
                   fmt::format("exact  N={} K={} hvp={} measured={} predicted={} K^(N-1)={}", N, K,
                               to_string(mode), got, want, floor));
    }
    c.hvp = HvpMode::Auto;
    const long bao = solve_bao(q, c).counter.gradient_calls;
    suite.record(bao == static_cast<long>(N) * K,
                 fmt::format("bao    N={} K={} measured={} predicted={}", N, K, bao, N * K));
    const EvalCounter ap = solve_approx_dag(q, c).counter;
    const bool ok = ap.gradient_calls == chain_approx_grads(N, K) &&
                    ap.favi_calls == chain_approx_favi(N, K) &&
                    ap.jacobian_calls == chain_approx_jacobians(N, K);
    suite.record(ok, fmt::format("approx N={} K={} grads={}/{} favi={}/{} jacobians={}/{}", N, K,
                                 ap.gradient_calls, chain_approx_grads(N, K), ap.favi_calls,
                                 chain_approx_favi(N, K), ap.jacobian_calls,
                                 chain_approx_jacobians(N, K)));
  }
  QuadraticModel q(make_quadratic(make_chain(3, 2), {1, 1.0, 0.5}));
  OptimConfig c;
  c.K = 3;
  c.hvp = HvpMode::Analytic;
  const double ratio = static_cast<double>(solve_dag(q, c).counter.gradient_calls) /
                       static_cast<double>(solve_bao(q, c).counter.gradient_calls);
  suite.record(ratio > 3.0, fmt::format("exact/bao ratio at N=3 K=3: {:.3f} (> 3)", ratio));
  return suite.done();
}

SuiteResult verify_gradcheck(const VerifyOptions& opt) {
  Suite suite("gradcheck");
  auto check = [&](const std::string& name, const Model& model, double tol) {
    Subject m(model, opt.inject_fault);
    const GradCheckReport r = grad_check(m.get(), 10, tol, 1);
    suite.record(r.passed,
                 fmt::format("{} max_rel_error={:.3e} tol={:.0e} worst_node={} trial={}", name,
                             r.max_rel_error, tol, r.worst_node, r.worst_trial),
                 r.max_rel_error);
  };
  check("quadratic q1", QuadraticModel(quadratic_chain_q1()), 1e-5);
  check("quadratic q2", QuadraticModel(quadratic_2level_q2()), 1e-5);
  check("quadratic q3", QuadraticModel(quadratic_coupled_q3()), 1e-5);
  for (const auto& s : codec_suite()) {
    check(fmt::format("codec {} seed={}", s.name, s.seed), suite_model(s), 1e-4);
  }
  check("codec T=3 seed=7", CodecModel(make_codec(3, 2, 1.0, 7)), 1e-4);
  return suite.done();
}

SuiteResult verify_gap(const VerifyOptions&) {
  Suite suite("gap");
  OptimConfig c;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    QuadraticModel q(make_quadratic(make_edgeless(3, 2), {seed, 0.0, 0.5}));
    double worst = 0.0;
    for (NodeId i = 1; i <= 3; ++i) worst = std::max(worst, bao_gradient_gap(q, i, c));
    suite.record(worst <= 1e-12,
                 fmt::format("edgeless separable seed={} max gap={:.3e} (<= 1e-12)", seed, worst));
  }
  QuadraticModel q3(quadratic_coupled_q3());
  for (NodeId i : {1, 2}) {
    const double gap = bao_gradient_gap(q3, i, c);
    suite.record(gap > 0.01, fmt::format("chain q3 node={} gap={:.6g} (> 0.01)", i, gap), 0.0);
  }
  // inner nodes frozen at their init: only the initializer path remains
  QuadraticModel q(make_quadratic(make_chain(2, 2), {4, 0.0, 0.5}));
  OptimConfig c0 = c;
  c0.K_override[2] = 0;
  const Values s = favi_fill(q);
  const Eigen::MatrixXd C = q.favi_jacobian(s, 2, 1);
  const double want = (C.transpose() * q.grad(s, 2)).norm();
  const double got = bao_gradient_gap(q, 1, c0);
  const double err = std::abs(got - want) / std::max(want, 1e-12);
  suite.record(err < 1e-8, fmt::format("initializer-only gap={:.10g} predicted={:.10g} rel={:.2e}",
                                       got, want, err));
  return suite.done();
}

SuiteResult verify_factorized(const VerifyOptions&) {
  Suite suite("factorized");
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    std::vector<int> dims(n);
    for (int i = 0; i < n; ++i) dims[i] = 1 + static_cast<int>((seed + i) % 3);
    QuadraticModel q(make_quadratic(LatentDag(dims, {}), {seed, 0.0, 0.5}));
    OptimConfig c;
    c.K = 1 + static_cast<int>(seed % 4);
    const SolveResult b = solve_bao(q, c);
    const SolveResult a = solve_approx_dag(q, c);
    const SolveResult e = solve_dag(q, c);
    const bool ok = same_bits(b.values, a.values) && same_bits(b.values, e.values) &&
                    std::memcmp(&b.objective, &a.objective, sizeof(double)) == 0 &&
                    std::memcmp(&b.objective, &e.objective, sizeof(double)) == 0;
    suite.record(ok, fmt::format("edgeless seed={} N={} K={} L bao={} approx={} exact={}", seed,
                                 n, c.K, format_double(b.objective), format_double(a.objective),
                                 format_double(e.objective)));
  }
  return suite.done();
}

SuiteResult verify_ordering(const VerifyOptions&) {
  Suite suite("ordering");
  const OptimConfig c = suite_optim();
  for (const auto& s : codec_suite()) {
    const CodecModel m = suite_model(s);
    const auto reps = compare_methods(m, {Method::Favi, Method::Bao, Method::Approx, Method::Exact}, c);
    const double favi = reps[0].L, bao = reps[1].L, approx = reps[2].L, exact = reps[3].L;
    const double worst = std::max({0.0, approx - exact, bao - approx, favi - bao});
    const bool ok = worst == 0.0;
    std::string broken;
    if (exact < approx) broken += " exact<approx";
    if (approx < bao) broken += " approx<bao";
    if (bao < favi) broken += " bao<favi";
    suite.record(ok,
                 fmt::format("{} seed={} T={} K={} exact={} approx={} bao={} favi={}{}", s.name,
                             s.seed, s.T, c.K, format_double(exact), format_double(approx),
                             format_double(bao), format_double(favi), broken),
                 worst);
  }
  return suite.done();
}

SuiteResult verify_ablation(const VerifyOptions&) {
  Suite suite("ablation");
  for (const auto& s : codec_suite()) {
    const CodecModel m = suite_model(s);
    auto total = [&](Method method, Mask mask) {
      OptimConfig c = suite_optim();
      c.frozen = frozen_nodes(mask, s.T);
      return run_allocation(m, method, c).L;
    };
    const double joint = total(Method::Approx, Mask::Joint);
    const double w = total(Method::Approx, Mask::WOnly);
    const double y = total(Method::Approx, Mask::YOnly);
    const bool ok = joint >= w && joint >= y;
    suite.record(ok, fmt::format("{} approx joint={} w-only={} y-only={}", s.name,
                                 format_double(joint), format_double(w), format_double(y)),
                 std::max({0.0, w - joint, y - joint}));
    const double bj = total(Method::Bao, Mask::Joint);
    const double bw = total(Method::Bao, Mask::WOnly);
    const double by = total(Method::Bao, Mask::YOnly);
    suite.note(fmt::format("info {} bao joint={} w-only={} y-only={} (not gated)", s.name,
                                 format_double(bj), format_double(bw), format_double(by)));
  }
  return suite.done();
}

SuiteResult verify_invariants(const VerifyOptions&) {
  Suite suite("invariants");
  std::vector<std::pair<std::string, QuadraticModel>> quads;
  quads.emplace_back("q1", QuadraticModel(quadratic_chain_q1()));
  quads.emplace_back("q3", QuadraticModel(quadratic_coupled_q3()));
  quads.emplace_back("diamond",
                     QuadraticModel(make_quadratic(LatentDag({2, 1, 2, 1}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}}),
                                                   {9, 1.0, 0.5})));
  QuadraticModel q2(quadratic_2level_q2());

  auto check_monotone = [&](const std::string& name, const QuadraticModel& q, int K) {
    std::vector<Method> methods = {Method::Bao, Method::Approx, Method::Exact};
    if (q.dag().node_count() == 2 && q.dag().has_edge(1, 2)) methods.push_back(Method::TwoLevel);
    for (Method m : methods) {
      OptimConfig c;
      c.K = K;
      c.alpha = 1.0 / q.lambda_max();
      std::string label = "alpha=1/lambda_max(A)";
      if (m == Method::Approx) {
        const SolveResult plain = run_method(q, m, c);
        double drop = 0.0;
        const bool ok = non_decreasing(plain.trace, &drop);
        suite.note(fmt::format("info monotone {} approx alpha=1/lambda_max(A) {} worst_drop={:.3e} "
                               "(not gated)",
                               name, ok ? "holds" : "broken", drop));
        c.alpha = std::min(c.alpha, approx_safe_alpha(q));
        label = "alpha=composite-safe";
      }
      const SolveResult r = run_method(q, m, c);
      double worst = 0.0;
      const bool ok = non_decreasing(r.trace, &worst);
      suite.record(ok, fmt::format("monotone {} {} {}={:.6g} events={} worst_drop={:.3e}", name,
                                   to_string(m), label, c.alpha, r.trace.size(), worst));
    }
  };

  for (auto& [name, q] : quads) {
    check_monotone(name, q, 4);
  }
  check_monotone("q2", q2, 6);

  OptimConfig zero;
  zero.K = 0;
  const CodecModel codec = suite_model(codec_suite().front());
  std::vector<std::pair<std::string, const Model*>> models = {
      {"q1", &quads[0].second}, {"q2", &q2}, {"codec c1", &codec}};
  for (auto& [name, model] : models) {
    const Values init = favi_fill(*model);
    for (Method m : {Method::Favi, Method::Bao, Method::Approx, Method::Exact, Method::TwoLevel}) {
      if (m == Method::TwoLevel && model != &q2) continue;
      const SolveResult r = run_method(*model, m, zero);
      suite.record(same_bits(r.values, init),
                   fmt::format("K=0 fixed point {} {}", name, to_string(m)));
    }
  }

  {
    OptimConfig c;
    c.K = 3;
    for (Method m : {Method::Bao, Method::Approx, Method::Exact}) {
      const bool ok = serialize(run_method(quads[1].second, m, c)) ==
                      serialize(run_method(quads[1].second, m, c));
      suite.record(ok, fmt::format("determinism q3 {} serialization", to_string(m)));
    }
    const std::vector<Method> methods = {Method::Favi, Method::Bao, Method::Approx, Method::Exact};
    const std::string first = comparison_csv(compare_methods(codec, methods, c));
    const std::string again = comparison_csv(compare_methods(suite_model(codec_suite().front()), methods, c));
    suite.record(first == again, fmt::format("determinism codec c1 csv bytes={}", first.size()));
  }
  return suite.done();
}

const std::vector<std::string>& verify_profiles() {
  static const std::vector<std::string> names = {"thm1",       "thm2",     "complexity",
                                                 "gradcheck",  "gap",      "factorized",
                                                 "ordering",   "ablation", "invariants"};
  return names;
}

std::vector<SuiteResult> run_verify(const std::string& profile, const VerifyOptions& opt) {
  static const std::map<std::string, std::function<SuiteResult(const VerifyOptions&)>> table = {
      {"thm1", verify_thm1},           {"thm2", verify_thm2},
      {"complexity", verify_complexity}, {"gradcheck", verify_gradcheck},
      {"gap", verify_gap},             {"factorized", verify_factorized},
      {"ordering", verify_ordering},   {"ablation", verify_ablation},
      {"invariants", verify_invariants},
  };
  std::vector<SuiteResult> out;
  if (profile == "all") {
    for (const auto& name : verify_profiles()) out.push_back(table.at(name)(opt));
    return out;
  }
  auto it = table.find(profile);
  if (it == table.end()) throw ConfigError(fmt::format("unknown verify profile '{}'", profile));
  out.push_back(it->second(opt));
  return out;
}

}  // namespace savi
