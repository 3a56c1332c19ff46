#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "savi/graph.hpp"

namespace savi {

/// Per-node parameter vectors; slot 0 is the (empty) root.
using Values = std::vector<Eigen::VectorXd>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long event) : std::runtime_error(what), event_(event) {}
  long event() const { return event_; }

 private:
  long event_;
};

/// Zero-filled values shaped like `dag`.
Values zero_values(const LatentDag& dag);
void check_shape(const LatentDag& dag, const Values& values);
bool all_finite(const Values& values);
double max_abs(const Values& values);

/**
 * Everything a solver needs from a latent model.
 *
 * grad() is the plain partial of the objective with respect to one block,
 * all other blocks held fixed. favi_init() computes the amortized initial
 * value of a node from the current values of its parents only.
 */
class Model {
 public:
  virtual ~Model() = default;

  virtual const LatentDag& dag() const = 0;
  virtual double objective(const Values& v) const = 0;

  /// Full gradient, one block per node (root slot empty).
  virtual Values grad_all(const Values& v) const = 0;
  virtual Eigen::VectorXd grad(const Values& v, NodeId node) const { return grad_all(v)[node]; }

  virtual Eigen::VectorXd favi_init(const Values& v, NodeId node) const = 0;
  /// d favi_init(child) / d value(ancestor), dim(child) x dim(ancestor).
  virtual Eigen::MatrixXd favi_jacobian(const Values& v, NodeId child, NodeId ancestor) const = 0;

  virtual bool has_hvp() const { return false; }
  /// (d^2 L / d out d in) * dir.
  virtual Eigen::VectorXd hvp(const Values& v, NodeId out, NodeId in,
                              const Eigen::VectorXd& dir) const;
  /// Hessian column block for `in` applied to dir, for every node.
  virtual Values hvp_all(const Values& v, NodeId in, const Eigen::VectorXd& dir) const;

  virtual std::string node_label(NodeId node) const;
};

/// Fills every node with its FAVI value in topological order.
Values favi_fill(const Model& model);

}  // namespace savi
