#pragma once

#include <cstdint>
#include <optional>

#include "savi/model.hpp"

namespace savi {

/**
 * Toy autoregressive codec. Frame t has a motion-like latent w_t (node 2t-1)
 * and a residual-like latent y_t (node 2t). The decoder runs
 *   x'_t = tanh(Dx x'_{t-1} + Dw w_t + Dy y_t + db),   x'_0 = 0
 * and the rate of z_t = (w_t, y_t) is a quadratic penalty around
 *   mu_t = tanh(P z_{t-1} + pb),   z_0 = 0.
 */
struct CodecSpec {
  int T = 2;
  int d = 2;
  double lambda0 = 1.0;
  double precision = 0.25;
  double kappa = 0.8;  // shrink of the residual encoder
  double rho = 0.05;   // ridge of the residual encoder
  std::uint64_t seed = 7;

  std::vector<Eigen::VectorXd> x;  // evidence frames 1..T stored at 0..T-1

  Eigen::MatrixXd Dx, Dw, Dy;
  Eigen::VectorXd db;
  Eigen::MatrixXd P;  // 2d x 2d
  Eigen::VectorXd pb;
  Eigen::MatrixXd Ew;
  Eigen::VectorXd ew;
};

/// Seeded weights; evidence is drawn from the seed unless given (entries must lie in (-1, 1)).
CodecSpec make_codec(int T, int d, double lambda0, std::uint64_t seed, double precision = 0.25,
                     std::optional<std::vector<Eigen::VectorXd>> evidence = std::nullopt);

struct FrameReport {
  int frame = 0;
  double R = 0.0;
  double D = 0.0;
  double L = 0.0;
};

class CodecModel : public Model {
 public:
  explicit CodecModel(CodecSpec spec);

  const LatentDag& dag() const override { return dag_; }
  const CodecSpec& spec() const { return spec_; }

  static NodeId w_node(int t) { return 2 * t - 1; }
  static NodeId y_node(int t) { return 2 * t; }
  static int frame_of(NodeId node) { return (node + 1) / 2; }
  static bool is_w(NodeId node) { return node % 2 == 1; }

  std::vector<FrameReport> frames(const Values& v) const;
  double objective(const Values& v) const override;
  Values grad_all(const Values& v) const override;

  Eigen::VectorXd favi_init(const Values& v, NodeId node) const override;
  Eigen::MatrixXd favi_jacobian(const Values& v, NodeId child, NodeId ancestor) const override;

  std::string node_label(NodeId node) const override;

 private:
  std::vector<Eigen::VectorXd> decode(const Values& v, int upto) const;
  Eigen::VectorXd target_preact(const std::vector<Eigen::VectorXd>& xr, int t) const;

  CodecSpec spec_;
  LatentDag dag_;
  Eigen::MatrixXd M_;  // (Dy^T Dy + rho I)^-1 Dy^T
  std::vector<Eigen::VectorXd> atanh_x_;
};

}  // namespace savi
