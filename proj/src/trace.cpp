#include <algorithm>

#include <fmt/format.h>

#include "savi/solver.hpp"

namespace savi {

int OptimConfig::steps(NodeId node) const {
  if (frozen.count(node)) return 0;
  auto it = K_override.find(node);
  return it == K_override.end() ? K : it->second;
}

int OptimConfig::max_steps() const {
  int m = K;
  for (const auto& [node, k] : K_override) m = std::max(m, k);
  return m;
}

void OptimConfig::validate(const LatentDag& dag) const {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (K < 0) throw ConfigError("K must be non-negative");
  for (const auto& [node, k] : K_override) {
    if (node < 1 || node > dag.node_count()) {
      throw ConfigError(fmt::format("K override for unknown node {}", node));
    }
    if (k < 0) throw ConfigError(fmt::format("K override for node {} is negative", node));
  }
  for (NodeId node : frozen) {
    if (node < 1 || node > dag.node_count()) {
      throw ConfigError(fmt::format("frozen node {} does not exist", node));
    }
  }
  if (!(fd.r > 0.0) || !(fd.h > 0.0)) throw ConfigError("fd.r and fd.h must be positive");
  if (!(oracle_h > 0.0)) throw ConfigError("oracle step must be positive");
}

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

std::string format_event(const Event& e) {
  std::string k;
  for (std::size_t i = 1; i < e.k.size(); ++i) {
    if (i > 1) k += ',';
    k += std::to_string(e.k[i]);
  }
  return fmt::format("E {} {} node={} k=({}) L={}", e.seq,
                     e.kind == Event::Kind::Init ? "init" : "step", e.node, k,
                     format_double(e.L));
}

std::string format_events(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    out += format_event(e);
    out += '\n';
  }
  return out;
}

std::string serialize(const SolveResult& r) {
  std::string out = fmt::format("method {}\nobjective {}\n", r.method, format_double(r.objective));
  for (std::size_t i = 1; i < r.values.size(); ++i) {
    out += fmt::format("node {} steps {} value", i, r.steps[i]);
    for (int c = 0; c < r.values[i].size(); ++c) out += ' ' + format_double(r.values[i][c]);
    out += '\n';
  }
  out += "trace";
  for (double t : r.trace) out += ' ' + format_double(t);
  out += fmt::format("\ncounter {} {} {} {}\n", r.counter.gradient_calls, r.counter.hvp_calls,
                     r.counter.favi_calls, r.counter.jacobian_calls);
  out += format_events(r.events);
  return out;
}

namespace detail {

void Recorder::push(Event::Kind kind, NodeId node, const Values& s) {
  Event e;
  e.seq = next_seq();
  e.kind = kind;
  e.node = node;
  ev_.event = e.seq;
  e.k = k_;
  e.L = ev_.objective(s);
  events_.push_back(std::move(e));
}

void Recorder::init(NodeId node, const Values& s) {
  k_[node] = 0;
  push(Event::Kind::Init, node, s);
}

void Recorder::step(NodeId node, const Values& s) {
  ++k_[node];
  push(Event::Kind::Step, node, s);
}

SolveResult finish(const std::string& method, const Evaluator& ev, const OptimConfig& cfg,
                   Values values, const std::vector<int>& counts, std::vector<double> trace,
                   const EvalCounter& counter, std::vector<Event> events) {
  SolveResult r;
  r.method = method;
  r.objective = ev.objective(values);
  r.values = std::move(values);
  r.steps = counts;
  r.provenance.assign(counts.size(), Provenance::FaviInit);
  for (std::size_t i = 1; i < counts.size(); ++i) {
    const int K = cfg.steps(static_cast<NodeId>(i));
    if (counts[i] == 0) r.provenance[i] = Provenance::FaviInit;
    else if (counts[i] >= K) r.provenance[i] = Provenance::Converged;
    else r.provenance[i] = Provenance::Updated;
  }
  r.trace = std::move(trace);
  r.counter = counter;
  r.events = std::move(events);
  return r;
}

}  // namespace detail

}  // namespace savi
