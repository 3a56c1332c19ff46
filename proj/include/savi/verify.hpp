#pragma once

#include <string>
#include <vector>

#include "savi/alloc.hpp"

namespace savi {

struct VerifyOptions {
  bool inject_fault = false;  // corrupt one gradient coordinate; suites must then fail
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  double max_error = 0.0;
  double seconds = 0.0;
  std::vector<std::string> lines;  // one per case
  std::string failure;             // first failing case, with its seed and values
};

/// Gradient-call counts of solve_dag on a chain of n nodes, from the
/// recursion alone. `fd` selects finite-difference Hessian columns at leaves.
long chain_exact_grads(int n, int K, bool fd);
/// solve_approx_dag counts on a chain of n nodes.
long chain_approx_grads(int n, int K);
long chain_approx_favi(int n, int K);
long chain_approx_jacobians(int n, int K);

/// Seeded codec suite C1..C5.
struct SuiteSpec {
  std::string name;
  int T = 2;
  int d = 2;
  double lambda0 = 1.0;
  std::uint64_t seed = 7;
};
const std::vector<SuiteSpec>& codec_suite();
OptimConfig suite_optim();

SuiteResult verify_thm1(const VerifyOptions& opt = {});
SuiteResult verify_thm2(const VerifyOptions& opt = {});
SuiteResult verify_complexity(const VerifyOptions& opt = {});
SuiteResult verify_gradcheck(const VerifyOptions& opt = {});
SuiteResult verify_gap(const VerifyOptions& opt = {});
SuiteResult verify_factorized(const VerifyOptions& opt = {});
SuiteResult verify_ordering(const VerifyOptions& opt = {});
SuiteResult verify_ablation(const VerifyOptions& opt = {});
SuiteResult verify_invariants(const VerifyOptions& opt = {});

const std::vector<std::string>& verify_profiles();
/// `all` runs every suite; unknown names raise ConfigError.
std::vector<SuiteResult> run_verify(const std::string& profile, const VerifyOptions& opt = {});

}  // namespace savi
