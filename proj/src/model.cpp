#include "savi/model.hpp"

#include <cmath>

#include <fmt/format.h>

namespace savi {

Values zero_values(const LatentDag& dag) {
  Values v(dag.node_count() + 1);
  v[0] = Eigen::VectorXd();
  for (NodeId i = 1; i <= dag.node_count(); ++i) v[i] = Eigen::VectorXd::Zero(dag.dim(i));
  return v;
}

void check_shape(const LatentDag& dag, const Values& values) {
  if (static_cast<int>(values.size()) != dag.node_count() + 1) {
    throw DimensionError(fmt::format("expected {} value slots, got {}", dag.node_count() + 1,
                                     values.size()));
  }
  for (NodeId i = 1; i <= dag.node_count(); ++i) {
    if (values[i].size() != dag.dim(i)) {
      throw DimensionError(
          fmt::format("node {} has dimension {}, expected {}", i, values[i].size(), dag.dim(i)));
    }
  }
}

bool all_finite(const Values& values) {
  for (const auto& v : values) {
    if (!v.allFinite()) return false;
  }
  return true;
}

double max_abs(const Values& values) {
  double m = 0.0;
  for (const auto& v : values) {
    if (v.size()) m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

Eigen::VectorXd Model::hvp(const Values&, NodeId, NodeId, const Eigen::VectorXd&) const {
  throw std::logic_error("model has no analytic Hessian-vector product");
}

Values Model::hvp_all(const Values&, NodeId, const Eigen::VectorXd&) const {
  throw std::logic_error("model has no analytic Hessian-vector product");
}

std::string Model::node_label(NodeId node) const { return fmt::format("y{}", node); }

Values favi_fill(const Model& model) {
  const LatentDag& dag = model.dag();
  Values v = zero_values(dag);
  for (NodeId id : topo_sort(dag)) {
    if (id == kRoot) continue;
    v[id] = model.favi_init(v, id);
  }
  return v;
}

}  // namespace savi
