#include "savi/codec_model.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

namespace savi {

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = scale * normal(rng);
  return m;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double scale) {
  return random_matrix(rng, n, 1, scale).col(0);
}

Eigen::VectorXd one_minus_sq(const Eigen::VectorXd& t) {
  return (1.0 - t.array().square()).matrix();
}

}  // namespace

CodecSpec make_codec(int T, int d, double lambda0, std::uint64_t seed, double precision,
                     std::optional<std::vector<Eigen::VectorXd>> evidence) {
  if (T < 1 || d < 1) throw DimensionError("codec needs T >= 1 and d >= 1");
  CodecSpec s;
  s.T = T;
  s.d = d;
  s.lambda0 = lambda0;
  s.precision = precision;
  s.seed = seed;

  std::mt19937_64 rng(seed);
  const double scale = 0.5 / std::sqrt(static_cast<double>(d));
  s.Dx = random_matrix(rng, d, d, scale);
  s.Dw = random_matrix(rng, d, d, scale);
  s.Dy = random_matrix(rng, d, d, scale);
  s.db = random_vector(rng, d, scale);
  s.P = random_matrix(rng, 2 * d, 2 * d, scale);
  s.pb = random_vector(rng, 2 * d, scale);
  s.Ew = random_matrix(rng, d, d, scale);
  s.ew = random_vector(rng, d, scale);

  if (evidence) {
    s.x = *evidence;
  } else {
    std::uniform_real_distribution<double> unif(-0.8, 0.8);
    for (int t = 0; t < T; ++t) {
      Eigen::VectorXd f(d);
      for (int k = 0; k < d; ++k) f[k] = unif(rng);
      s.x.push_back(f);
    }
  }
  return s;
}

CodecModel::CodecModel(CodecSpec spec) : spec_(std::move(spec)) {
  const int T = spec_.T, d = spec_.d;
  if (static_cast<int>(spec_.x.size()) != T) {
    throw DimensionError(fmt::format("codec expects {} evidence frames, got {}", T, spec_.x.size()));
  }
  for (const auto& f : spec_.x) {
    if (f.size() != d) throw DimensionError(fmt::format("evidence frame must have {} entries", d));
    if ((f.array().abs() >= 1.0).any()) {
      throw DimensionError("evidence entries must lie strictly inside (-1, 1)");
    }
    atanh_x_.push_back(f.array().atanh().matrix());
  }
  auto sq = [&](const Eigen::MatrixXd& m, int r, int c, const char* name) {
    if (m.rows() != r || m.cols() != c) throw DimensionError(fmt::format("{} has wrong shape", name));
  };
  sq(spec_.Dx, d, d, "Dx");
  sq(spec_.Dw, d, d, "Dw");
  sq(spec_.Dy, d, d, "Dy");
  sq(spec_.db, d, 1, "db");
  sq(spec_.P, 2 * d, 2 * d, "P");
  sq(spec_.pb, 2 * d, 1, "pb");
  sq(spec_.Ew, d, d, "Ew");
  sq(spec_.ew, d, 1, "ew");

  dag_ = make_complete(std::vector<int>(2 * T, d));
  Eigen::MatrixXd gram = spec_.Dy.transpose() * spec_.Dy;
  gram.diagonal().array() += spec_.rho;
  M_ = gram.ldlt().solve(spec_.Dy.transpose());
}

std::string CodecModel::node_label(NodeId node) const {
  return fmt::format("{}{}", is_w(node) ? 'w' : 'y', frame_of(node));
}

// reconstructions x'_0..x'_upto
std::vector<Eigen::VectorXd> CodecModel::decode(const Values& v, int upto) const {
  std::vector<Eigen::VectorXd> xr(upto + 1);
  xr[0] = Eigen::VectorXd::Zero(spec_.d);
  for (int t = 1; t <= upto; ++t) {
    Eigen::VectorXd pre = spec_.Dx * xr[t - 1] + spec_.Dw * v[w_node(t)] + spec_.Dy * v[y_node(t)] +
                          spec_.db;
    xr[t] = pre.array().tanh().matrix();
  }
  return xr;
}

std::vector<FrameReport> CodecModel::frames(const Values& v) const {
  check_shape(dag_, v);
  const int T = spec_.T, d = spec_.d;
  auto xr = decode(v, T);
  std::vector<FrameReport> out;
  Eigen::VectorXd zprev = Eigen::VectorXd::Zero(2 * d);
  for (int t = 1; t <= T; ++t) {
    Eigen::VectorXd z(2 * d);
    z << v[w_node(t)], v[y_node(t)];
    Eigen::VectorXd mu = (spec_.P * zprev + spec_.pb).array().tanh().matrix();
    FrameReport f;
    f.frame = t;
    f.R = 0.5 * spec_.precision * (z - mu).squaredNorm();
    f.D = (spec_.x[t - 1] - xr[t]).squaredNorm();
    f.L = -(f.R + spec_.lambda0 * f.D);
    out.push_back(f);
    zprev = z;
  }
  return out;
}

double CodecModel::objective(const Values& v) const {
  double total = 0.0;
  for (const auto& f : frames(v)) total += f.L;
  return total;
}

Values CodecModel::grad_all(const Values& v) const {
  check_shape(dag_, v);
  const int T = spec_.T, d = spec_.d;
  auto xr = decode(v, T);
  Values g = zero_values(dag_);

  // distortion, backward through the decoder recursion
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(d);  // dL/dx'_t from frame t+1
  for (int t = T; t >= 1; --t) {
    Eigen::VectorXd a = 2.0 * spec_.lambda0 * (spec_.x[t - 1] - xr[t]) + carry;
    Eigen::VectorXd gp = one_minus_sq(xr[t]).cwiseProduct(a);
    g[w_node(t)] += spec_.Dw.transpose() * gp;
    g[y_node(t)] += spec_.Dy.transpose() * gp;
    carry = spec_.Dx.transpose() * gp;
  }

  // rate
  std::vector<Eigen::VectorXd> z(T + 1), mu(T + 1);
  z[0] = Eigen::VectorXd::Zero(2 * d);
  for (int t = 1; t <= T; ++t) {
    z[t].resize(2 * d);
    z[t] << v[w_node(t)], v[y_node(t)];
    mu[t] = (spec_.P * z[t - 1] + spec_.pb).array().tanh().matrix();
  }
  for (int t = 1; t <= T; ++t) {
    Eigen::VectorXd gz = -spec_.precision * (z[t] - mu[t]);
    if (t < T) {
      Eigen::VectorXd r = spec_.precision * (z[t + 1] - mu[t + 1]);
      gz += spec_.P.transpose() * one_minus_sq(mu[t + 1]).cwiseProduct(r);
    }
    g[w_node(t)] += gz.head(d);
    g[y_node(t)] += gz.tail(d);
  }
  return g;
}

Eigen::VectorXd CodecModel::target_preact(const std::vector<Eigen::VectorXd>& xr, int t) const {
  return atanh_x_[t - 1] - spec_.Dx * xr[t - 1] - spec_.db;
}

Eigen::VectorXd CodecModel::favi_init(const Values& v, NodeId node) const {
  check_shape(dag_, v);
  if (node < 1 || node > dag_.node_count()) throw GraphError(fmt::format("unknown node {}", node));
  const int t = frame_of(node);
  auto xr = decode(v, t - 1);
  Eigen::VectorXd u = target_preact(xr, t);
  if (is_w(node)) return (spec_.Ew * u + spec_.ew).array().tanh().matrix();
  return spec_.kappa * M_ * (u - spec_.Dw * v[w_node(t)]);
}

Eigen::MatrixXd CodecModel::favi_jacobian(const Values& v, NodeId child, NodeId ancestor) const {
  check_shape(dag_, v);
  const int n = dag_.node_count(), d = spec_.d;
  if (child < 1 || child > n || ancestor < 1 || ancestor > n) {
    throw GraphError(fmt::format("invalid Jacobian pair ({}, {})", child, ancestor));
  }
  const int t = frame_of(child);
  const int m = frame_of(ancestor);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(d, d);
  if (ancestor >= child) return zero;

  if (m == t) {
    // only y_t depends on w_t within a frame
    return -spec_.kappa * M_ * spec_.Dw;
  }

  // d x'_{t-1} / d ancestor by forward recursion from frame m
  auto xr = decode(v, t - 1);
  Eigen::MatrixXd J = one_minus_sq(xr[m]).asDiagonal() * (is_w(ancestor) ? spec_.Dw : spec_.Dy);
  for (int s = m + 1; s <= t - 1; ++s) J = one_minus_sq(xr[s]).asDiagonal() * (spec_.Dx * J);

  Eigen::MatrixXd du = -spec_.Dx * J;  // d u_t / d ancestor
  if (is_w(child)) {
    Eigen::VectorXd w0 = (spec_.Ew * target_preact(xr, t) + spec_.ew).array().tanh().matrix();
    return one_minus_sq(w0).asDiagonal() * (spec_.Ew * du);
  }
  return spec_.kappa * M_ * du;
}

}  // namespace savi
