#include "collage/autodiff.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace collage::ad {

namespace {
constexpr double kMaskedLogProb = -1e30;
}

Tape::Var Tape::emit(Eigen::MatrixXd value, std::function<void(Tape&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::leaf(const Eigen::MatrixXd& v) { return emit(v, nullptr); }

Tape::Var Tape::add(Var a, Var b) {
  Var out = emit(val(a) + val(b), nullptr);
  nodes_[out.id].backprop = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out);
    t.grad_mut(b) += t.grad(out);
  };
  return out;
}

Tape::Var Tape::sub(Var a, Var b) {
  Var out = emit(val(a) - val(b), nullptr);
  nodes_[out.id].backprop = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out);
    t.grad_mut(b) -= t.grad(out);
  };
  return out;
}

Tape::Var Tape::cmul(Var a, Var b) {
  Var out = emit(val(a).cwiseProduct(val(b)), nullptr);
  nodes_[out.id].backprop = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out).cwiseProduct(t.val(b));
    t.grad_mut(b) += t.grad(out).cwiseProduct(t.val(a));
  };
  return out;
}

Tape::Var Tape::matmul(Var a, Var b) {
  Var out = emit(val(a) * val(b), nullptr);
  nodes_[out.id].backprop = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out) * t.val(b).transpose();
    t.grad_mut(b) += t.val(a).transpose() * t.grad(out);
  };
  return out;
}

Tape::Var Tape::tanh(Var a) {
  Var out = emit(val(a).array().tanh().matrix(), nullptr);
  nodes_[out.id].backprop = [a, out](Tape& t) {
    t.grad_mut(a) +=
        t.grad(out).cwiseProduct((1.0 - t.val(out).array().square()).matrix());
  };
  return out;
}

Tape::Var Tape::sigmoid(Var a) {
  Eigen::MatrixXd y = (1.0 / (1.0 + (-val(a).array()).exp())).matrix();
  Var out = emit(std::move(y), nullptr);
  nodes_[out.id].backprop = [a, out](Tape& t) {
    const auto& y = t.val(out).array();
    t.grad_mut(a) += t.grad(out).cwiseProduct((y * (1.0 - y)).matrix());
  };
  return out;
}

Tape::Var Tape::exp(Var a) {
  Var out = emit(val(a).array().exp().matrix(), nullptr);
  nodes_[out.id].backprop = [a, out](Tape& t) {
    t.grad_mut(a) += t.grad(out).cwiseProduct(t.val(out));
  };
  return out;
}

Tape::Var Tape::scale(Var a, double k) {
  Var out = emit(val(a) * k, nullptr);
  nodes_[out.id].backprop = [a, out, k](Tape& t) { t.grad_mut(a) += t.grad(out) * k; };
  return out;
}

Tape::Var Tape::sum(Var a) {
  Eigen::MatrixXd s(1, 1);
  s(0, 0) = val(a).sum();
  Var out = emit(std::move(s), nullptr);
  nodes_[out.id].backprop = [a, out](Tape& t) {
    t.grad_mut(a).array() += t.grad(out)(0, 0);
  };
  return out;
}

Tape::Var Tape::square(Var a) {
  Var out = emit(val(a).array().square().matrix(), nullptr);
  nodes_[out.id].backprop = [a, out](Tape& t) {
    t.grad_mut(a) += 2.0 * t.grad(out).cwiseProduct(t.val(a));
  };
  return out;
}

Tape::Var Tape::concat_rows(Var a, Var b) {
  assert(val(a).cols() == 1 && val(b).cols() == 1);
  Eigen::MatrixXd v(val(a).rows() + val(b).rows(), 1);
  v << val(a), val(b);
  Var out = emit(std::move(v), nullptr);
  const int na = static_cast<int>(val(a).rows());
  nodes_[out.id].backprop = [a, b, out, na](Tape& t) {
    const int nb = static_cast<int>(t.val(b).rows());
    t.grad_mut(a) += t.grad(out).topRows(na);
    t.grad_mut(b) += t.grad(out).bottomRows(nb);
  };
  return out;
}

Tape::Var Tape::slice_rows(Var a, int start, int len) {
  Var out = emit(val(a).middleRows(start, len), nullptr);
  nodes_[out.id].backprop = [a, out, start, len](Tape& t) {
    t.grad_mut(a).middleRows(start, len) += t.grad(out);
  };
  return out;
}

Tape::Var Tape::pick(Var a, int row) {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = val(a)(row, 0);
  Var out = emit(std::move(v), nullptr);
  nodes_[out.id].backprop = [a, out, row](Tape& t) {
    t.grad_mut(a)(row, 0) += t.grad(out)(0, 0);
  };
  return out;
}

Tape::Var Tape::masked_log_softmax(Var logits, const std::vector<std::uint8_t>& mask) {
  const auto& x = val(logits);
  const int n = static_cast<int>(x.rows());
  assert(static_cast<int>(mask.size()) == n);

  double max_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (mask[i]) max_val = std::max(max_val, x(i, 0));
  }
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mask[i]) z += std::exp(x(i, 0) - max_val);
  }
  const double log_z = max_val + std::log(z);

  Eigen::MatrixXd out_v(n, 1);
  for (int i = 0; i < n; ++i) {
    out_v(i, 0) = mask[i] ? x(i, 0) - log_z : kMaskedLogProb;
  }
  Var out = emit(std::move(out_v), nullptr);
  nodes_[out.id].backprop = [logits, out, mask](Tape& t) {
    const auto& lp = t.val(out);
    const auto& g = t.grad(out);
    const int n = static_cast<int>(lp.rows());
    double g_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mask[i]) g_sum += g(i, 0);
    }
    auto& dst = t.grad_mut(logits);
    for (int j = 0; j < n; ++j) {
      if (mask[j]) dst(j, 0) += g(j, 0) - std::exp(lp(j, 0)) * g_sum;
    }
  };
  return out;
}

void Tape::backward(Var output) {
  assert(val(output).size() == 1);
  grad_mut(output)(0, 0) = 1.0;
  for (int i = output.id; i >= 0; --i) {
    if (nodes_[i].backprop && nodes_[i].grad.cwiseAbs().sum() != 0.0) {
      nodes_[i].backprop(*this);
    }
  }
}

}  // namespace collage::ad
