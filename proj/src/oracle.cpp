#include <algorithm>

#include <fmt/format.h>

#include "savi/solver.hpp"

namespace savi {

namespace {

class Oracle {
 public:
  Oracle(const Model& model, const OptimConfig& cfg) : model_(model), cfg_(cfg) {
    const auto order = topo_sort(model.dag());
    pos_.assign(model.dag().node_count() + 1, 0);
    for (std::size_t p = 0; p < order.size(); ++p) pos_[order[p]] = static_cast<int>(p);
    fd_.h = cfg.oracle_h;
    fd_.scaling = FdScaling::Relative;
  }

  Eigen::VectorXd grad(const Values& s, NodeId node) const {
    if (model_.dag().children(node).empty()) return model_.grad(s, node);
    ScalarFn f = [&](const Values& v) {
      Values w = v;
      run(node, w);
      return model_.objective(w);
    };
    return grad_fd(f, s, node, fd_);
  }

 private:
  // literal nested procedure: children re-initialized, then ascended with
  // gradients that are themselves differences through their own subtrees.
  // Computing a child's gradient leaves its subtree re-converged in `s`.
  void run(NodeId node, Values& s) const {
    std::vector<NodeId> kids = model_.dag().children(node);
    std::sort(kids.begin(), kids.end(), [&](NodeId a, NodeId b) { return pos_[a] < pos_[b]; });
    for (NodeId j : kids) {
      s[j] = model_.favi_init(s, j);
      for (int k = 0; k < cfg_.steps(j); ++k) {
        const Eigen::VectorXd g = grad(s, j);
        run(j, s);
        s[j] += cfg_.alpha * g;
      }
    }
  }

  const Model& model_;
  const OptimConfig& cfg_;
  std::vector<int> pos_;
  FdConfig fd_;
};

}  // namespace

Eigen::VectorXd oracle_outer_grad(const Model& model, const Values& state, NodeId node,
                                  const OptimConfig& cfg) {
  const LatentDag& dag = model.dag();
  cfg.validate(dag);
  check_shape(dag, state);
  if (node < 1 || node > dag.node_count()) throw GraphError(fmt::format("unknown node {}", node));
  int dim = 0;
  for (NodeId d : descendants(dag, node)) dim += dag.dim(d);
  if (dim > 16) {
    throw GuardError(fmt::format("oracle guard: descendant dimension {} exceeds 16", dim));
  }
  if (cfg.max_steps() > 8) {
    throw GuardError(fmt::format("oracle guard: K = {} exceeds 8", cfg.max_steps()));
  }
  return Oracle(model, cfg).grad(state, node);
}

double bao_gradient_gap(const Model& model, const Values& state, NodeId node,
                        const OptimConfig& cfg) {
  const Eigen::VectorXd total = oracle_outer_grad(model, state, node, cfg);
  return (total - model.grad(state, node)).norm();
}

double bao_gradient_gap(const Model& model, NodeId node, const OptimConfig& cfg) {
  return bao_gradient_gap(model, favi_fill(model), node, cfg);
}

}  // namespace savi
