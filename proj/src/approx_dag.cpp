#include "savi/solver.hpp"

namespace savi {

SolveResult solve_approx_dag(const Model& model, const OptimConfig& cfg) {
  const LatentDag& dag = model.dag();
  cfg.validate(dag);
  EvalCounter counter;
  Evaluator ev(model, counter, cfg.hvp, cfg.fd);
  detail::Recorder rec(ev, dag.node_count());

  const auto order = topo_sort(dag);
  const int n = static_cast<int>(order.size());
  std::vector<int> pos(dag.node_count() + 1, 0);
  for (int p = 0; p < n; ++p) pos[order[p]] = p;

  Values s = zero_values(dag);
  auto reinit_from = [&](int first) {
    for (int q = first; q < n; ++q) {
      s[order[q]] = ev.favi(s, order[q]);
      rec.init(order[q], s);
    }
  };

  std::vector<double> trace;
  for (int p = 0; p < n; ++p) {
    const NodeId i = order[p];
    reinit_from(p);
    if (p == 0) trace.push_back(ev.objective(s));

    for (int k = 0; k < cfg.steps(i); ++k) {
      // gradient with later nodes tied to y_i through their initialization
      Values lam = ev.grad_all(s);
      for (int q = n - 1; q > p; --q) {
        const NodeId m = order[q];
        if ((lam[m].array() == 0.0).all()) continue;
        for (NodeId par : dag.parents(m)) {
          if (pos[par] < p) continue;
          lam[par] += ev.jacobian(s, m, par).transpose() * lam[m];
        }
      }
      s[i] += cfg.alpha * lam[i];
      rec.step(i, s);
      reinit_from(p + 1);
      trace.push_back(ev.objective(s));
    }
  }
  return detail::finish("approx", ev, cfg, std::move(s), rec.counts(), std::move(trace), counter,
                        rec.take());
}

}  // namespace savi
