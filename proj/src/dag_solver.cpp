#include <algorithm>
#include <functional>
#include <memory>

#include <fmt/format.h>

#include "savi/solver.hpp"

namespace savi {

namespace {

// Forward record of one call that re-initializes and ascends the children of `node`.
struct Tape {
  struct Child {
    NodeId node = 0;
    Values before;               // state the child was initialized from
    std::vector<Values> states;  // state before each ascent step
    std::vector<Values> grads;   // full hypergradient at each of them
    std::vector<std::unique_ptr<Tape>> subs;  // nested record of each step
  };
  std::vector<Child> children;
};

bool any_nonzero(const Values& lam, const std::vector<NodeId>& nodes) {
  for (NodeId m : nodes) {
    if ((lam[m].array() != 0.0).any()) return true;
  }
  return false;
}

class DagEngine {
 public:
  using Listener = std::function<void(NodeId, Event::Kind, const Values&)>;

  DagEngine(Evaluator& ev, const OptimConfig& cfg)
      : ev_(ev), cfg_(cfg), rooted_(add_virtual_root(ev.dag())) {
    const auto order = topo_sort(rooted_);
    pos_.assign(rooted_.node_count() + 1, 0);
    for (std::size_t p = 0; p < order.size(); ++p) pos_[order[p]] = static_cast<int>(p);
    kids_.resize(rooted_.node_count() + 1);
    for (NodeId i = 0; i <= rooted_.node_count(); ++i) {
      kids_[i] = rooted_.children(i);
      std::sort(kids_[i].begin(), kids_[i].end(),
                [&](NodeId a, NodeId b) { return pos_[a] < pos_[b]; });
    }
    written_.resize(rooted_.node_count() + 1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      std::vector<bool> mark(rooted_.node_count() + 1, false);
      for (NodeId c : kids_[*it]) {
        mark[c] = true;
        if (cfg_.steps(c) > 0)
          for (NodeId d : written_[c]) mark[d] = true;
      }
      for (NodeId m = 1; m <= rooted_.node_count(); ++m)
        if (mark[m]) written_[*it].push_back(m);
    }
  }

  // Re-initializes and ascends the children of `node`, mutating `s`. The tape
  // is only filled when `tape` is given.
  void forward(NodeId node, Values& s, Tape* tape, const Listener* top, const Listener* nested) {
    for (NodeId j : kids_[node]) {
      Tape::Child c;
      c.node = j;
      if (tape) c.before = s;
      s[j] = ev_.favi(s, j);
      if (top) (*top)(j, Event::Kind::Init, s);
      const int K = cfg_.steps(j);
      for (int k = 0; k < K; ++k) {
        auto sub = std::make_unique<Tape>();
        if (tape) c.states.push_back(s);
        Values g = hypergrad(j, s, *sub, nested, nested);
        s[j] += cfg_.alpha * g[j];
        if (tape) {
          c.grads.push_back(std::move(g));
          c.subs.push_back(std::move(sub));
        }
        if (top) (*top)(j, Event::Kind::Step, s);
      }
      if (tape) tape->children.push_back(std::move(c));
    }
  }

  // d L(after forward(node)) / d s, every block; `s` ends at the forwarded state.
  Values hypergrad(NodeId node, Values& s, Tape& tape, const Listener* top,
                   const Listener* nested) {
    forward(node, s, &tape, top, nested);
    Values lam = ev_.grad_all(s);
    reverse(tape, lam);
    return lam;
  }

  // lam <- (d forward / d s)^T lam
  void reverse(const Tape& tape, Values& lam) {
    for (auto it = tape.children.rbegin(); it != tape.children.rend(); ++it) {
      const Tape::Child& c = *it;
      const NodeId j = c.node;
      const int K = static_cast<int>(c.states.size());
      for (int k = K - 1; k >= 0; --k) {
        const Eigen::VectorXd lj = lam[j];
        if (any_nonzero(lam, written_[j])) reverse(*c.subs[k], lam);
        if ((lj.array() != 0.0).any()) {
          const Values h = hessian_column(j, c.states[k], lj, c.grads[k]);
          for (std::size_t m = 1; m < lam.size(); ++m) lam[m] += cfg_.alpha * h[m];
        }
      }
      const Eigen::VectorXd lj = lam[j];
      lam[j].setZero();
      if ((lj.array() != 0.0).any()) {
        for (NodeId p : rooted_.parents(j)) {
          if (p == kRoot) continue;
          lam[p] += ev_.jacobian(c.before, j, p).transpose() * lj;
        }
      }
    }
  }

  // Hessian of (L after forward(j)) times dir placed on block j, every block.
  Values hessian_column(NodeId j, const Values& at, const Eigen::VectorXd& dir,
                        const Values& base) {
    if (kids_[j].empty()) return ev_.hvp_all(at, j, dir, base);
    const double eps = hvp_step(at[j], dir, ev_.fd());
    Values moved = at;
    moved[j] += eps * dir;
    Tape scratch;
    const Values g1 = hypergrad(j, moved, scratch, nullptr, nullptr);
    Values out(at.size());
    for (std::size_t m = 0; m < at.size(); ++m) out[m] = (g1[m] - base[m]) / eps;
    return out;
  }

 private:
  Evaluator& ev_;
  const OptimConfig& cfg_;
  LatentDag rooted_;
  std::vector<int> pos_;
  std::vector<std::vector<NodeId>> kids_;
  std::vector<std::vector<NodeId>> written_;
};

}  // namespace

Values grad_dag_full(const Model& model, const Values& state, NodeId node, const OptimConfig& cfg,
                     EvalCounter* counter) {
  const LatentDag& dag = model.dag();
  cfg.validate(dag);
  check_shape(dag, state);
  if (node < 1 || node > dag.node_count()) throw GraphError(fmt::format("unknown node {}", node));
  EvalCounter local;
  Evaluator ev(model, counter ? *counter : local, cfg.hvp, cfg.fd);
  DagEngine engine(ev, cfg);
  Values s = state;
  Tape tape;
  return engine.hypergrad(node, s, tape, nullptr, nullptr);
}

Eigen::VectorXd grad_dag(const Model& model, const Values& state, NodeId node,
                         const OptimConfig& cfg, EvalCounter* counter) {
  return grad_dag_full(model, state, node, cfg, counter)[node];
}

SolveResult solve_dag(const Model& model, const OptimConfig& cfg) {
  const LatentDag& dag = model.dag();
  cfg.validate(dag);
  EvalCounter counter;
  Evaluator ev(model, counter, cfg.hvp, cfg.fd);
  detail::Recorder rec(ev, dag.node_count());
  DagEngine engine(ev, cfg);

  // every node needs a value before the recursion reads it
  Values s = zero_values(dag);
  for (NodeId i : topo_sort(dag)) s[i] = ev.favi(s, i);
  std::vector<double> trace{ev.objective(s)};

  DagEngine::Listener nested = [&](NodeId j, Event::Kind kind, const Values& v) {
    if (kind == Event::Kind::Init) rec.init(j, v);
    else rec.step(j, v);
  };
  DagEngine::Listener top = [&](NodeId j, Event::Kind kind, const Values& v) {
    nested(j, kind, v);
    trace.push_back(ev.objective(v));
  };
  engine.forward(kRoot, s, nullptr, &top, &nested);
  return detail::finish("exact", ev, cfg, std::move(s), rec.counts(), std::move(trace), counter,
                        rec.take());
}

}  // namespace savi
