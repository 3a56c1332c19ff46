#include "savi/quadratic_model.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

namespace savi {

QuadraticSpec make_quadratic(const LatentDag& dag, const QuadraticOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = dag.total_dim();

  Eigen::MatrixXd G(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) G(r, c) = normal(rng);
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(n, n) + 0.5 * G * G.transpose() / n;

  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (NodeId i = 1; i <= dag.node_count(); ++i) {
    const int d = dag.dim(i);
    block.block(off, off, d, d) = full.block(off, off, d, d);
    off += d;
  }

  QuadraticSpec spec;
  spec.dag = dag;
  spec.A = (1.0 - opt.coupling) * block + opt.coupling * full;
  spec.A = 0.5 * (spec.A + spec.A.transpose());
  spec.b.resize(n);
  for (int r = 0; r < n; ++r) spec.b[r] = normal(rng);

  spec.c = zero_values(dag);
  for (NodeId i = 1; i <= dag.node_count(); ++i)
    for (int r = 0; r < dag.dim(i); ++r) spec.c[i][r] = normal(rng);

  for (const Edge& e : dag.edges()) {
    const int dj = dag.dim(e.child), di = dag.dim(e.parent);
    Eigen::MatrixXd m(dj, di);
    const double s = opt.favi_scale / std::sqrt(static_cast<double>(di));
    for (int r = 0; r < dj; ++r)
      for (int c = 0; c < di; ++c) m(r, c) = s * normal(rng);
    spec.C[e] = m;
  }
  return spec;
}

QuadraticSpec quadratic_chain_q1() { return make_quadratic(make_chain(3, 2), {1, 1.0, 0.5}); }

QuadraticSpec quadratic_2level_q2() { return make_quadratic(make_chain(2, 2), {2, 1.0, 0.5}); }

QuadraticSpec quadratic_coupled_q3() { return make_quadratic(make_chain(3, 2), {3, 1.0, 0.8}); }

QuadraticModel::QuadraticModel(QuadraticSpec spec) : spec_(std::move(spec)) {
  const LatentDag& dag = spec_.dag;
  const int n = dag.total_dim();
  if (spec_.A.rows() != n || spec_.A.cols() != n || spec_.b.size() != n) {
    throw DimensionError(fmt::format("A/b must have size {}", n));
  }
  check_shape(dag, spec_.c);
  for (const Edge& e : dag.edges()) {
    auto it = spec_.C.find(e);
    if (it == spec_.C.end()) {
      spec_.C[e] = Eigen::MatrixXd::Zero(dag.dim(e.child), dag.dim(e.parent));
    } else if (it->second.rows() != dag.dim(e.child) || it->second.cols() != dag.dim(e.parent)) {
      throw DimensionError(fmt::format("C for edge {}>{} has wrong shape", e.parent, e.child));
    }
  }
  offsets_.assign(dag.node_count() + 1, 0);
  int off = 0;
  for (NodeId i = 1; i <= dag.node_count(); ++i) {
    offsets_[i] = off;
    off += dag.dim(i);
  }
}

Eigen::VectorXd QuadraticModel::flatten(const Values& v) const {
  check_shape(spec_.dag, v);
  Eigen::VectorXd y(spec_.dag.total_dim());
  for (NodeId i = 1; i <= spec_.dag.node_count(); ++i) y.segment(offsets_[i], v[i].size()) = v[i];
  return y;
}

Values QuadraticModel::unflatten(const Eigen::VectorXd& y) const {
  Values v = zero_values(spec_.dag);
  for (NodeId i = 1; i <= spec_.dag.node_count(); ++i) v[i] = y.segment(offsets_[i], v[i].size());
  return v;
}

// b_row - (A y)_row, summed in ascending column order
double QuadraticModel::row_residual(const Eigen::VectorXd& y, int row) const {
  double acc = 0.0;
  for (int c = 0; c < y.size(); ++c) acc += spec_.A(row, c) * y[c];
  return spec_.b[row] - acc;
}

double QuadraticModel::objective(const Values& v) const {
  const Eigen::VectorXd y = flatten(v);
  double quad = 0.0, lin = 0.0;
  for (int r = 0; r < y.size(); ++r) {
    double acc = 0.0;
    for (int c = 0; c < y.size(); ++c) acc += spec_.A(r, c) * y[c];
    quad += y[r] * acc;
    lin += spec_.b[r] * y[r];
  }
  return -0.5 * quad + lin;
}

Values QuadraticModel::grad_all(const Values& v) const {
  const Eigen::VectorXd y = flatten(v);
  Values g = zero_values(spec_.dag);
  for (NodeId i = 1; i <= spec_.dag.node_count(); ++i)
    for (int r = 0; r < g[i].size(); ++r) g[i][r] = row_residual(y, offsets_[i] + r);
  return g;
}

Eigen::VectorXd QuadraticModel::grad(const Values& v, NodeId node) const {
  const Eigen::VectorXd y = flatten(v);
  Eigen::VectorXd g(spec_.dag.dim(node));
  for (int r = 0; r < g.size(); ++r) g[r] = row_residual(y, offsets_[node] + r);
  return g;
}

Eigen::VectorXd QuadraticModel::favi_init(const Values& v, NodeId node) const {
  Eigen::VectorXd out = spec_.c[node];
  for (NodeId p : spec_.dag.parents(node)) {
    if (p == kRoot) continue;
    out += spec_.C.at({p, node}) * v[p];
  }
  return out;
}

Eigen::MatrixXd QuadraticModel::favi_jacobian(const Values&, NodeId child, NodeId ancestor) const {
  if (!spec_.dag.is_valid(child) || !spec_.dag.is_valid(ancestor) || child == kRoot ||
      ancestor == kRoot) {
    throw GraphError(fmt::format("invalid Jacobian pair ({}, {})", child, ancestor));
  }
  auto it = spec_.C.find({ancestor, child});
  if (it == spec_.C.end()) {
    return Eigen::MatrixXd::Zero(spec_.dag.dim(child), spec_.dag.dim(ancestor));
  }
  return it->second;
}

Eigen::VectorXd QuadraticModel::hvp(const Values& v, NodeId out, NodeId in,
                                    const Eigen::VectorXd& dir) const {
  check_shape(spec_.dag, v);
  Eigen::VectorXd r(spec_.dag.dim(out));
  for (int a = 0; a < r.size(); ++a) {
    double acc = 0.0;
    for (int c = 0; c < dir.size(); ++c) acc += spec_.A(offsets_[out] + a, offsets_[in] + c) * dir[c];
    r[a] = -acc;
  }
  return r;
}

Values QuadraticModel::hvp_all(const Values& v, NodeId in, const Eigen::VectorXd& dir) const {
  Values out = zero_values(spec_.dag);
  for (NodeId m = 1; m <= spec_.dag.node_count(); ++m) out[m] = hvp(v, m, in, dir);
  return out;
}

double QuadraticModel::lambda_max() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec_.A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Values QuadraticModel::optimum() const { return unflatten(spec_.A.ldlt().solve(spec_.b)); }

}  // namespace savi
