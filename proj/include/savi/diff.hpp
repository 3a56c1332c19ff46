#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "savi/model.hpp"

namespace savi {

enum class FdScaling { Absolute, Relative };

struct FdConfig {
  double r = 1e-4;  // forward-difference radius for Hessian-vector products
  double h = 1e-6;  // central-difference step for gradients
  FdScaling scaling = FdScaling::Relative;
};

std::string to_string(FdScaling s);
FdScaling parse_fd_scaling(const std::string& s);

using ScalarFn = std::function<double(const Values&)>;
using GradFn = std::function<Values(const Values&)>;

/// Central differences over the coordinates of one node.
Eigen::VectorXd grad_fd(const ScalarFn& f, const Values& at, NodeId node, const FdConfig& fd);

/// Step applied along `dir` when perturbing a block with value `block`.
double hvp_step(const Eigen::VectorXd& block, const Eigen::VectorXd& dir, const FdConfig& fd);

/// Forward-difference Hessian column for node `in`, every block:
/// (g(at + eps dir on `in`) - g(at)) / eps. `base` may carry g(at) already.
Values hvp_fd_all(const GradFn& g, const Values& at, NodeId in, const Eigen::VectorXd& dir,
                  const FdConfig& fd, const Values* base = nullptr);

/// Block `out` of hvp_fd_all.
Eigen::VectorXd hvp_fd(const GradFn& g, const Values& at, NodeId out, NodeId in,
                       const Eigen::VectorXd& dir, const FdConfig& fd);

/// ||a - b||_inf / max(||a||_inf, ||b||_inf, 1e-8)
double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct GradCheckReport {
  int trials = 0;
  double max_rel_error = 0.0;
  NodeId worst_node = -1;
  int worst_trial = -1;
  bool passed = true;
};

/// Compares analytic gradients against central differences at `trials`
/// seeded points scattered around the FAVI initialization.
GradCheckReport grad_check(const Model& model, int trials, double tol, std::uint64_t seed,
                           const FdConfig& fd = {});

/// Test-only decorator: shifts one gradient coordinate by `delta`.
class FaultyModel : public Model {
 public:
  FaultyModel(const Model& inner, NodeId node, int coord, double delta = 0.1)
      : inner_(inner), node_(node), coord_(coord), delta_(delta) {}

  const LatentDag& dag() const override { return inner_.dag(); }
  double objective(const Values& v) const override { return inner_.objective(v); }
  Values grad_all(const Values& v) const override;
  Eigen::VectorXd grad(const Values& v, NodeId node) const override;
  Eigen::VectorXd favi_init(const Values& v, NodeId node) const override {
    return inner_.favi_init(v, node);
  }
  Eigen::MatrixXd favi_jacobian(const Values& v, NodeId child, NodeId ancestor) const override {
    return inner_.favi_jacobian(v, child, ancestor);
  }
  bool has_hvp() const override { return inner_.has_hvp(); }
  Eigen::VectorXd hvp(const Values& v, NodeId out, NodeId in,
                      const Eigen::VectorXd& dir) const override {
    return inner_.hvp(v, out, in, dir);
  }
  Values hvp_all(const Values& v, NodeId in, const Eigen::VectorXd& dir) const override {
    return inner_.hvp_all(v, in, dir);
  }
  std::string node_label(NodeId node) const override { return inner_.node_label(node); }

 private:
  const Model& inner_;
  NodeId node_;
  int coord_;
  double delta_;
};

}  // namespace savi
