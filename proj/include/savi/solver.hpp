#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "savi/evaluator.hpp"

namespace savi {

struct OptimConfig {
  double alpha = 0.1;
  int K = 2;
  std::map<NodeId, int> K_override;
  std::set<NodeId> frozen;  // nodes held at their FAVI value (K = 0)
  HvpMode hvp = HvpMode::Auto;
  FdConfig fd;
  std::uint64_t seed = 1;
  double oracle_h = 1e-2;  // central step of the unrolled oracle, relative

  int steps(NodeId node) const;
  int max_steps() const;
  void validate(const LatentDag& dag) const;
};

enum class Provenance { FaviInit, Updated, Converged };

struct Event {
  enum class Kind { Init, Step };
  long seq = 0;
  Kind kind = Kind::Init;
  NodeId node = 0;
  std::vector<int> k;  // step counters of nodes 1..N after the event
  double L = 0.0;
};

struct SolveResult {
  std::string method;
  Values values;
  std::vector<int> steps;  // per node, slot 0 unused
  std::vector<Provenance> provenance;
  double objective = 0.0;
  std::vector<double> trace;  // objective after each outer event, starting at the initialization
  EvalCounter counter;
  std::vector<Event> events;
};

std::string format_double(double x);
std::string format_event(const Event& e);
std::string format_events(const std::vector<Event>& events);
/// Stable text form; identical runs give identical strings.
std::string serialize(const SolveResult& r);

/// Simultaneous ascent with plain partials at the joint iterate.
SolveResult solve_bao(const Model& model, const OptimConfig& cfg);

struct TwoLevelGrad {
  Eigen::VectorXd grad;  // dL(w, y^K(w)) / dw
  Eigen::VectorXd y;     // y^K(w)
};

/// Hypergradient for the two-node model 1 > 2 (node 1 outer, node 2 inner).
TwoLevelGrad grad_2_level(const Model& model, const Eigen::VectorXd& w, const OptimConfig& cfg,
                          EvalCounter* counter = nullptr);
SolveResult solve_2_level(const Model& model, const OptimConfig& cfg);

/// Total derivative of L with respect to `node` after every descendant has
/// been re-initialized and ascended, starting from `state`. Values of nodes
/// outside the descendant set are held at `state`.
Eigen::VectorXd grad_dag(const Model& model, const Values& state, NodeId node,
                         const OptimConfig& cfg, EvalCounter* counter = nullptr);
/// Same, but returns the derivative with respect to every node.
Values grad_dag_full(const Model& model, const Values& state, NodeId node, const OptimConfig& cfg,
                     EvalCounter* counter = nullptr);
SolveResult solve_dag(const Model& model, const OptimConfig& cfg);

SolveResult solve_approx_dag(const Model& model, const OptimConfig& cfg);

/// Central differences through the literal nested forward procedure.
/// Small instances only: descendant dimension <= 16 and K <= 8.
Eigen::VectorXd oracle_outer_grad(const Model& model, const Values& state, NodeId node,
                                  const OptimConfig& cfg);

/// || total derivative - plain partial || for `node` at `state`.
double bao_gradient_gap(const Model& model, const Values& state, NodeId node,
                        const OptimConfig& cfg);
/// Same, at the FAVI initialization.
double bao_gradient_gap(const Model& model, NodeId node, const OptimConfig& cfg);

namespace detail {

/// Shared event bookkeeping for the solvers.
class Recorder {
 public:
  Recorder(Evaluator& ev, int n) : ev_(ev), k_(n + 1, 0) {}

  void init(NodeId node, const Values& s);
  void step(NodeId node, const Values& s);
  const std::vector<int>& counts() const { return k_; }
  std::vector<Event> take() { return std::move(events_); }
  long next_seq() const { return static_cast<long>(events_.size()) + 1; }

 private:
  void push(Event::Kind kind, NodeId node, const Values& s);

  Evaluator& ev_;
  std::vector<int> k_;
  std::vector<Event> events_;
};

SolveResult finish(const std::string& method, const Evaluator& ev, const OptimConfig& cfg,
                   Values values, const std::vector<int>& counts, std::vector<double> trace,
                   const EvalCounter& counter, std::vector<Event> events);

}  // namespace detail

}  // namespace savi
