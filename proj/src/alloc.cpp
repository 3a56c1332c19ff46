#include "savi/alloc.hpp"

#include <cmath>

#include <fmt/format.h>

namespace savi {

std::string to_string(Method m) {
  switch (m) {
    case Method::Favi: return "favi";
    case Method::Bao: return "bao";
    case Method::Approx: return "approx";
    case Method::Exact: return "exact";
    case Method::TwoLevel: return "savi2";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::Favi, Method::Bao, Method::Approx, Method::Exact, Method::TwoLevel}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError(fmt::format("unknown method '{}'", s));
}

std::string to_string(Mask m) {
  switch (m) {
    case Mask::WOnly: return "w-only";
    case Mask::YOnly: return "y-only";
    default: return "joint";
  }
}

Mask parse_mask(const std::string& s) {
  if (s == "joint") return Mask::Joint;
  if (s == "w-only") return Mask::WOnly;
  if (s == "y-only") return Mask::YOnly;
  throw ConfigError(fmt::format("unknown optimize mask '{}' (joint, w-only, y-only)", s));
}

std::set<NodeId> frozen_nodes(Mask m, int T) {
  std::set<NodeId> out;
  for (int t = 1; t <= T; ++t) {
    if (m == Mask::WOnly) out.insert(CodecModel::y_node(t));
    if (m == Mask::YOnly) out.insert(CodecModel::w_node(t));
  }
  return out;
}

SolveResult run_method(const Model& model, Method m, const OptimConfig& cfg) {
  switch (m) {
    case Method::Favi: {
      OptimConfig none = cfg;
      none.K = 0;
      none.K_override.clear();
      SolveResult r = solve_bao(model, none);
      r.method = "favi";
      return r;
    }
    case Method::Bao: return solve_bao(model, cfg);
    case Method::Approx: return solve_approx_dag(model, cfg);
    case Method::Exact: return solve_dag(model, cfg);
    case Method::TwoLevel: return solve_2_level(model, cfg);
  }
  throw ConfigError("unknown method");
}

void check_exact_guard(int T, const OptimConfig& cfg) {
  const int K = cfg.max_steps();
  if (T > 3) throw GuardError(fmt::format("exact method limited to T <= 3 (got T = {})", T));
  const double budget = std::pow(static_cast<double>(K), 2 * T - 1);
  if (budget > 1000.0) {
    throw GuardError(fmt::format(
        "exact method needs on the order of K^(2T-1) = {} nested solves for T = {}, K = {} "
        "(limit 1000)",
        budget, T, K));
  }
}

void check_exact_guard_nodes(int nodes, const OptimConfig& cfg) {
  const int K = cfg.max_steps();
  if (nodes > 6) throw GuardError(fmt::format("exact method limited to 6 nodes (got {})", nodes));
  const double budget = std::pow(static_cast<double>(K), nodes - 1);
  if (budget > 1000.0) {
    throw GuardError(fmt::format(
        "exact method needs on the order of K^(N-1) = {} nested solves for N = {}, K = {} "
        "(limit 1000)",
        budget, nodes, K));
  }
}

double bpp_like(double R, int d) { return R / (d * std::log(2.0)); }

AllocationReport run_allocation(const CodecModel& model, Method m, const OptimConfig& cfg) {
  if (m == Method::TwoLevel) throw ConfigError("savi2 is not a bit-allocation method");
  if (m == Method::Exact) check_exact_guard(model.spec().T, cfg);

  AllocationReport rep;
  rep.method = to_string(m);
  rep.d = model.spec().d;
  rep.result = run_method(model, m, cfg);
  rep.counter = rep.result.counter;

  const auto frames = model.frames(rep.result.values);
  for (const auto& f : frames) {
    FrameRow row;
    row.frame = f.frame;
    row.R = f.R;
    row.D = f.D;
    row.L = f.L;
    row.steps = rep.result.steps[CodecModel::w_node(f.frame)] +
                rep.result.steps[CodecModel::y_node(f.frame)];
    rep.R += f.R;
    rep.D += f.D;
    rep.L += f.L;
    rep.rows.push_back(row);
  }

  double r0 = 0.0;
  for (const auto& f : model.frames(favi_fill(model))) r0 += f.R;
  rep.bitrate_error = m == Method::Favi || r0 == 0.0 ? 0.0 : std::abs(rep.R - r0) / r0;
  return rep;
}

std::vector<AllocationReport> compare_methods(const CodecModel& model,
                                              const std::vector<Method>& methods,
                                              const OptimConfig& cfg) {
  std::vector<AllocationReport> out;
  for (Method m : methods) out.push_back(run_allocation(model, m, cfg));
  return out;
}

std::string allocation_csv(const AllocationReport& r, bool header) {
  std::string out = header ? "method,frame,R,D,L,bpp_like,steps\n" : "";
  int steps = 0;
  for (const auto& row : r.rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.method, row.frame, format_double(row.R),
                       format_double(row.D), format_double(row.L),
                       format_double(bpp_like(row.R, r.d)), row.steps);
    steps += row.steps;
  }
  out += fmt::format("{},TOTALS,{},{},{},{},{}\n", r.method, format_double(r.R), format_double(r.D),
                     format_double(r.L), format_double(bpp_like(r.R, r.d)), steps);
  return out;
}

std::string comparison_csv(const std::vector<AllocationReport>& reports) {
  std::string out = "method,frame,R,D,L,bpp_like,steps\n";
  for (const auto& r : reports) out += allocation_csv(r, false);
  return out;
}

std::string node_csv(const SolveResult& r) {
  std::string out = "method,node,steps,norm\n";
  int steps = 0;
  for (std::size_t i = 1; i < r.values.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", r.method, i, r.steps[i], format_double(r.values[i].norm()));
    steps += r.steps[i];
  }
  out += fmt::format("{},TOTALS,{},{}\n", r.method, steps, format_double(r.objective));
  return out;
}

}  // namespace savi
