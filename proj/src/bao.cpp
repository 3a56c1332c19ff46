#include "savi/solver.hpp"

namespace savi {

SolveResult solve_bao(const Model& model, const OptimConfig& cfg) {
  const LatentDag& dag = model.dag();
  cfg.validate(dag);
  EvalCounter counter;
  Evaluator ev(model, counter, cfg.hvp, cfg.fd);
  detail::Recorder rec(ev, dag.node_count());
  const auto order = topo_sort(dag);

  Values s = zero_values(dag);
  for (NodeId i : order) {
    s[i] = ev.favi(s, i);
    rec.init(i, s);
  }
  std::vector<double> trace{ev.objective(s)};

  const int sweeps = cfg.max_steps();
  for (int k = 0; k < sweeps; ++k) {
    const Values snap = s;
    bool moved = false;
    for (NodeId i = 1; i <= dag.node_count(); ++i) {
      if (k >= cfg.steps(i)) continue;
      s[i] = snap[i] + cfg.alpha * ev.grad(snap, i);
      rec.step(i, s);
      moved = true;
    }
    if (moved) trace.push_back(ev.objective(s));
  }
  return detail::finish("bao", ev, cfg, std::move(s), rec.counts(), std::move(trace), counter,
                        rec.take());
}

}  // namespace savi
