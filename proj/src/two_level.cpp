#include <fmt/format.h>

#include "savi/solver.hpp"

namespace savi {

namespace {

constexpr NodeId kW = 1;
constexpr NodeId kY = 2;

void check_two_level(const LatentDag& dag) {
  if (dag.node_count() != 2 || !dag.has_edge(kW, kY) || dag.has_edge(kY, kW)) {
    throw GraphError("two-level solver needs exactly the graph 1>2");
  }
}

TwoLevelGrad run_grad(Evaluator& ev, const OptimConfig& cfg, const Eigen::VectorXd& w,
                      detail::Recorder* rec) {
  const int K = cfg.steps(kY);
  Values s = zero_values(ev.dag());
  s[kW] = w;
  s[kY] = ev.favi(s, kY);
  if (rec) rec->init(kY, s);

  std::vector<Values> at;     // (w, y^k') for k' < K
  std::vector<Values> grads;  // gradient at each of them
  for (int k = 0; k < K; ++k) {
    Values g = ev.grad_all(s);
    at.push_back(s);
    s[kY] += cfg.alpha * g[kY];
    grads.push_back(std::move(g));
    if (rec) rec->step(kY, s);
  }

  const Values gK = ev.grad_all(s);
  Eigen::VectorXd bw = gK[kW];
  Eigen::VectorXd by = gK[kY];
  for (int k = K - 1; k >= 0; --k) {
    const Values h = ev.hvp_all(at[k], kY, by, grads[k]);
    bw += cfg.alpha * h[kW];
    by += cfg.alpha * h[kY];
  }
  Values s0 = s;
  s0[kY] = Eigen::VectorXd::Zero(s[kY].size());
  bw += ev.jacobian(s0, kY, kW).transpose() * by;
  return {bw, s[kY]};
}

}  // namespace

TwoLevelGrad grad_2_level(const Model& model, const Eigen::VectorXd& w, const OptimConfig& cfg,
                          EvalCounter* counter) {
  check_two_level(model.dag());
  cfg.validate(model.dag());
  EvalCounter local;
  Evaluator ev(model, counter ? *counter : local, cfg.hvp, cfg.fd);
  if (w.size() != model.dag().dim(kW)) throw DimensionError("outer value has wrong dimension");
  return run_grad(ev, cfg, w, nullptr);
}

SolveResult solve_2_level(const Model& model, const OptimConfig& cfg) {
  const LatentDag& dag = model.dag();
  check_two_level(dag);
  cfg.validate(dag);
  EvalCounter counter;
  Evaluator ev(model, counter, cfg.hvp, cfg.fd);
  detail::Recorder rec(ev, dag.node_count());

  Values s = zero_values(dag);
  s[kW] = ev.favi(s, kW);
  rec.init(kW, s);

  std::vector<double> trace;
  for (int k = 0; k < cfg.steps(kW); ++k) {
    TwoLevelGrad g = run_grad(ev, cfg, s[kW], &rec);
    s[kY] = g.y;
    trace.push_back(ev.objective(s));
    s[kW] += cfg.alpha * g.grad;
    rec.step(kW, s);
  }

  // inner solve at the final outer value
  s[kY] = ev.favi(s, kY);
  rec.init(kY, s);
  for (int k = 0; k < cfg.steps(kY); ++k) {
    s[kY] += cfg.alpha * ev.grad(s, kY);
    rec.step(kY, s);
  }
  trace.push_back(ev.objective(s));
  return detail::finish("savi2", ev, cfg, std::move(s), rec.counts(), std::move(trace), counter,
                        rec.take());
}

}  // namespace savi
