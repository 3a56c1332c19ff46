#include "savi/diff.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

namespace savi {

std::string to_string(FdScaling s) { return s == FdScaling::Absolute ? "absolute" : "relative"; }

FdScaling parse_fd_scaling(const std::string& s) {
  if (s == "absolute") return FdScaling::Absolute;
  if (s == "relative") return FdScaling::Relative;
  throw std::invalid_argument(fmt::format("unknown fd scaling '{}'", s));
}

Eigen::VectorXd grad_fd(const ScalarFn& f, const Values& at, NodeId node, const FdConfig& fd) {
  Eigen::VectorXd g(at[node].size());
  Values p = at;
  for (int c = 0; c < g.size(); ++c) {
    const double x0 = at[node][c];
    const double step = fd.scaling == FdScaling::Relative ? fd.h * (1.0 + std::abs(x0)) : fd.h;
    p[node][c] = x0 + step;
    const double up = f(p);
    p[node][c] = x0 - step;
    const double dn = f(p);
    p[node][c] = x0;
    if (!std::isfinite(up) || !std::isfinite(dn)) {
      throw NumericError(fmt::format("non-finite objective in finite difference at node {}", node),
                         -1);
    }
    g[c] = (up - dn) / (2.0 * step);
  }
  return g;
}

double hvp_step(const Eigen::VectorXd& block, const Eigen::VectorXd& dir, const FdConfig& fd) {
  if (fd.scaling == FdScaling::Absolute) return fd.r;
  const double vn = dir.size() ? dir.cwiseAbs().maxCoeff() : 0.0;
  const double yn = block.size() ? block.cwiseAbs().maxCoeff() : 0.0;
  return fd.r * (1.0 + yn) / vn;
}

Values hvp_fd_all(const GradFn& g, const Values& at, NodeId in, const Eigen::VectorXd& dir,
                  const FdConfig& fd, const Values* base) {
  Values out(at.size());
  for (std::size_t k = 0; k < at.size(); ++k) out[k] = Eigen::VectorXd::Zero(at[k].size());
  if (dir.size() == 0 || dir.cwiseAbs().maxCoeff() == 0.0) return out;

  const double eps = hvp_step(at[in], dir, fd);
  Values moved = at;
  moved[in] += eps * dir;
  const Values g1 = g(moved);
  const Values g0 = base ? *base : g(at);
  for (std::size_t k = 0; k < at.size(); ++k) out[k] = (g1[k] - g0[k]) / eps;
  if (!all_finite(out)) {
    throw NumericError(fmt::format("non-finite Hessian-vector product at node {}", in), -1);
  }
  return out;
}

Eigen::VectorXd hvp_fd(const GradFn& g, const Values& at, NodeId out, NodeId in,
                       const Eigen::VectorXd& dir, const FdConfig& fd) {
  return hvp_fd_all(g, at, in, dir, fd)[out];
}

double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 && b.size() == 0) return 0.0;
  const double na = a.cwiseAbs().maxCoeff();
  const double nb = b.cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / std::max({na, nb, 1e-8});
}

GradCheckReport grad_check(const Model& model, int trials, double tol, std::uint64_t seed,
                           const FdConfig& fd) {
  const LatentDag& dag = model.dag();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.3);
  const Values base = favi_fill(model);
  ScalarFn f = [&](const Values& v) { return model.objective(v); };

  GradCheckReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Values v = base;
    for (NodeId i = 1; i <= dag.node_count(); ++i)
      for (int c = 0; c < v[i].size(); ++c) v[i][c] += normal(rng);
    for (NodeId i = 1; i <= dag.node_count(); ++i) {
      const double err = rel_error(model.grad(v, i), grad_fd(f, v, i, fd));
      if (err > rep.max_rel_error || rep.worst_node < 0) {
        if (err > rep.max_rel_error) rep.max_rel_error = err;
        rep.worst_node = i;
        rep.worst_trial = t;
      }
    }
  }
  rep.passed = rep.max_rel_error < tol;
  return rep;
}

Values FaultyModel::grad_all(const Values& v) const {
  Values g = inner_.grad_all(v);
  g[node_][coord_] += delta_;
  return g;
}

Eigen::VectorXd FaultyModel::grad(const Values& v, NodeId node) const {
  Eigen::VectorXd g = inner_.grad(v, node);
  if (node == node_) g[coord_] += delta_;
  return g;
}

}  // namespace savi
