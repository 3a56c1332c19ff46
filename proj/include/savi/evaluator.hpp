#pragma once

#include <string>

#include "savi/diff.hpp"
#include "savi/model.hpp"

namespace savi {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class HvpMode { Auto, Analytic, Fd };

std::string to_string(HvpMode m);
HvpMode parse_hvp_mode(const std::string& s);

struct EvalCounter {
  long gradient_calls = 0;  // one backward pass of L, whatever blocks are read
  long hvp_calls = 0;       // analytic Hessian-vector products
  long favi_calls = 0;
  long jacobian_calls = 0;

  friend bool operator==(const EvalCounter&, const EvalCounter&) = default;
};

/// Counting, finite-checking front end to a model. One per solver run.
class Evaluator {
 public:
  Evaluator(const Model& model, EvalCounter& counter, HvpMode mode, const FdConfig& fd);

  const Model& model() const { return model_; }
  const LatentDag& dag() const { return model_.dag(); }
  const FdConfig& fd() const { return fd_; }
  bool analytic_hvp() const { return analytic_; }

  double objective(const Values& v) const;
  Values grad_all(const Values& v);
  Eigen::VectorXd grad(const Values& v, NodeId node);
  Eigen::VectorXd favi(const Values& v, NodeId node);
  Eigen::MatrixXd jacobian(const Values& v, NodeId child, NodeId ancestor);

  /// Hessian column of L for node `in` times dir, all blocks. `base` is the
  /// gradient at `v`, reused by the finite-difference path.
  Values hvp_all(const Values& v, NodeId in, const Eigen::VectorXd& dir, const Values& base);

  /// Index of the event being processed, reported on numeric failure.
  long event = -1;

 private:
  [[noreturn]] void fail(const std::string& what) const;

  const Model& model_;
  EvalCounter& counter_;
  FdConfig fd_;
  bool analytic_ = false;
};

}  // namespace savi
