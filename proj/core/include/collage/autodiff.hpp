#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace collage::ad {

/// Reverse-mode tape over Eigen matrices. Build a scalar expression, call
/// backward() once, read grads. One tape per loss evaluation; not reusable.
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Var leaf(const Eigen::MatrixXd& v);

  const Eigen::MatrixXd& val(Var v) const { return nodes_[v.id].value; }
  const Eigen::MatrixXd& grad(Var v) const { return nodes_[v.id].grad; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);  // elementwise
  Var matmul(Var a, Var b);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var scale(Var a, double k);
  Var sum(Var a);     // 1x1
  Var square(Var a);  // elementwise
  Var concat_rows(Var a, Var b);
  Var slice_rows(Var a, int start, int len);
  Var pick(Var a, int row);  // 1x1 from a column vector

  /// Log-softmax over a column vector with masked entries excluded from the
  /// partition; masked outputs are a large negative constant with zero grad.
  Var masked_log_softmax(Var logits, const std::vector<std::uint8_t>& mask);

  /// Runs reverse accumulation from a 1x1 output.
  void backward(Var output);

  bool all_finite(Var v) const { return nodes_[v.id].value.allFinite(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    std::function<void(Tape&)> backprop;  // adds into parent grads
  };

  Var emit(Eigen::MatrixXd value, std::function<void(Tape&)> backprop);
  Eigen::MatrixXd& grad_mut(Var v) { return nodes_[v.id].grad; }

  std::vector<Node> nodes_;
};

}  // namespace collage::ad
