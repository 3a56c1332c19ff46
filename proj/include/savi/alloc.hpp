#pragma once

#include <string>
#include <vector>

#include "savi/codec_model.hpp"
#include "savi/solver.hpp"

namespace savi {

enum class Method { Favi, Bao, Approx, Exact, TwoLevel };

std::string to_string(Method m);
Method parse_method(const std::string& s);

/// Which latent kinds are optimized; the rest stay at their FAVI value.
enum class Mask { Joint, WOnly, YOnly };

std::string to_string(Mask m);
Mask parse_mask(const std::string& s);
std::set<NodeId> frozen_nodes(Mask m, int T);

/// Runs the chosen solver on any model; favi returns the initialization.
SolveResult run_method(const Model& model, Method m, const OptimConfig& cfg);

struct FrameRow {
  int frame = 0;
  double R = 0.0;
  double D = 0.0;
  double L = 0.0;
  int steps = 0;  // k_w + k_y
};

struct AllocationReport {
  std::string method;
  std::vector<FrameRow> rows;
  double R = 0.0;
  double D = 0.0;
  double L = 0.0;
  double bitrate_error = 0.0;  // |R - R_favi| / R_favi
  int d = 0;
  EvalCounter counter;
  SolveResult result;
};

/// Exact-method budget: T <= 3 and K^(2T-1) <= 1000.
void check_exact_guard(int T, const OptimConfig& cfg);
/// Same budget for a general graph: N <= 6 and K^(N-1) <= 1000.
void check_exact_guard_nodes(int nodes, const OptimConfig& cfg);

AllocationReport run_allocation(const CodecModel& model, Method m, const OptimConfig& cfg);
std::vector<AllocationReport> compare_methods(const CodecModel& model,
                                              const std::vector<Method>& methods,
                                              const OptimConfig& cfg);

double bpp_like(double R, int d);

/// `method,frame,R,D,L,bpp_like,steps` rows then a TOTALS row.
std::string allocation_csv(const AllocationReport& r, bool header = true);
std::string comparison_csv(const std::vector<AllocationReport>& reports);

/// Per-node table for non-codec models: `method,node,steps,norm` then TOTALS with L.
std::string node_csv(const SolveResult& r);

}  // namespace savi
