#pragma once

#include <cstdint>
#include <map>

#include "savi/model.hpp"

namespace savi {

/// L(y) = -1/2 y^T A y + b^T y over the stacked node blocks, linear FAVI.
struct QuadraticSpec {
  LatentDag dag;
  Eigen::MatrixXd A;  // symmetric positive definite
  Eigen::VectorXd b;
  std::map<Edge, Eigen::MatrixXd> C;  // C[{i, j}] maps y_i into y_j's init
  Values c;                           // per-node init offset
};

struct QuadraticOptions {
  std::uint64_t seed = 1;
  double coupling = 1.0;    // 0 keeps only the diagonal blocks of A
  double favi_scale = 0.5;  // spread of the C matrices
};

/// Seeded random instance on the given graph.
QuadraticSpec make_quadratic(const LatentDag& dag, const QuadraticOptions& opt);

/// Reference instances used throughout the tests.
QuadraticSpec quadratic_chain_q1();    // chain of 3, dims 2, seed 1
QuadraticSpec quadratic_2level_q2();   // 1>2, dims 2, seed 2
QuadraticSpec quadratic_coupled_q3();  // chain of 3, dims 2, seed 3, coupled

class QuadraticModel : public Model {
 public:
  explicit QuadraticModel(QuadraticSpec spec);

  const LatentDag& dag() const override { return spec_.dag; }
  const QuadraticSpec& spec() const { return spec_; }

  double objective(const Values& v) const override;
  Values grad_all(const Values& v) const override;
  Eigen::VectorXd grad(const Values& v, NodeId node) const override;

  Eigen::VectorXd favi_init(const Values& v, NodeId node) const override;
  Eigen::MatrixXd favi_jacobian(const Values& v, NodeId child, NodeId ancestor) const override;

  bool has_hvp() const override { return true; }
  Eigen::VectorXd hvp(const Values& v, NodeId out, NodeId in,
                      const Eigen::VectorXd& dir) const override;
  Values hvp_all(const Values& v, NodeId in, const Eigen::VectorXd& dir) const override;

  int offset(NodeId node) const { return offsets_[node]; }
  Eigen::VectorXd flatten(const Values& v) const;
  Values unflatten(const Eigen::VectorXd& y) const;
  /// Largest eigenvalue of A.
  double lambda_max() const;
  /// Maximizer A^-1 b.
  Values optimum() const;

 private:
  double row_residual(const Eigen::VectorXd& y, int row) const;

  QuadraticSpec spec_;
  std::vector<int> offsets_;
};

}  // namespace savi
