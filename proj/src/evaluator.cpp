#include "savi/evaluator.hpp"

#include <cmath>

#include <fmt/format.h>

namespace savi {

std::string to_string(HvpMode m) {
  switch (m) {
    case HvpMode::Analytic: return "analytic";
    case HvpMode::Fd: return "fd";
    default: return "auto";
  }
}

HvpMode parse_hvp_mode(const std::string& s) {
  if (s == "auto") return HvpMode::Auto;
  if (s == "analytic") return HvpMode::Analytic;
  if (s == "fd") return HvpMode::Fd;
  throw ConfigError(fmt::format("unknown hvp mode '{}' (expected analytic, fd or auto)", s));
}

Evaluator::Evaluator(const Model& model, EvalCounter& counter, HvpMode mode, const FdConfig& fd)
    : model_(model), counter_(counter), fd_(fd) {
  if (mode == HvpMode::Analytic && !model.has_hvp()) {
    throw ConfigError("hvp = analytic requested but the model has no analytic Hessian product");
  }
  analytic_ = mode == HvpMode::Analytic || (mode == HvpMode::Auto && model.has_hvp());
}

void Evaluator::fail(const std::string& what) const {
  throw NumericError(fmt::format("{} (event {})", what, event), event);
}

double Evaluator::objective(const Values& v) const {
  const double L = model_.objective(v);
  if (!std::isfinite(L)) fail("non-finite objective");
  return L;
}

Values Evaluator::grad_all(const Values& v) {
  ++counter_.gradient_calls;
  Values g = model_.grad_all(v);
  if (!all_finite(g)) fail("non-finite gradient");
  return g;
}

Eigen::VectorXd Evaluator::grad(const Values& v, NodeId node) {
  ++counter_.gradient_calls;
  Eigen::VectorXd g = model_.grad(v, node);
  if (!g.allFinite()) fail(fmt::format("non-finite gradient on node {}", node));
  return g;
}

Eigen::VectorXd Evaluator::favi(const Values& v, NodeId node) {
  ++counter_.favi_calls;
  Eigen::VectorXd y = model_.favi_init(v, node);
  if (!y.allFinite()) fail(fmt::format("non-finite initialization of node {}", node));
  return y;
}

Eigen::MatrixXd Evaluator::jacobian(const Values& v, NodeId child, NodeId ancestor) {
  ++counter_.jacobian_calls;
  return model_.favi_jacobian(v, child, ancestor);
}

Values Evaluator::hvp_all(const Values& v, NodeId in, const Eigen::VectorXd& dir,
                          const Values& base) {
  if (analytic_) {
    ++counter_.hvp_calls;
    Values h = model_.hvp_all(v, in, dir);
    if (!all_finite(h)) fail("non-finite Hessian-vector product");
    return h;
  }
  return hvp_fd_all([this](const Values& x) { return grad_all(x); }, v, in, dir, fd_, &base);
}

}  // namespace savi
