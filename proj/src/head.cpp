#include "ave/head.hpp"

#include <cmath>

#include "ave/errors.hpp"
#include "ave/ops.hpp"

namespace ave {

LinearParams LinearParams::init(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  LinearParams p;
  p.weight = uniform_tensor({in, out}, bound, rng);
  p.bias = uniform_tensor({out}, bound, rng);
  return p;
}

ParameterList LinearParams::parameters(const std::string& prefix) const {
  return {{prefix + "weight", weight}, {prefix + "bias", bias}};
}

PredictionHeadParams PredictionHeadParams::init(std::size_t in_width, std::size_t joint_hidden,
                                                std::size_t mlp_hidden1, std::size_t mlp_hidden2,
                                                std::size_t classes, Rng& rng) {
  PredictionHeadParams p;
  p.joint = BiLstmParams::init(in_width, joint_hidden, ResidualMode::kOff, rng);
  p.hidden1 = LinearParams::init(2 * joint_hidden, mlp_hidden1, rng);
  p.hidden2 = LinearParams::init(mlp_hidden1, mlp_hidden2, rng);
  p.output = LinearParams::init(mlp_hidden2, classes, rng);
  return p;
}

ParameterList PredictionHeadParams::parameters(const std::string& prefix) const {
  ParameterList out = joint.parameters(prefix + "joint_bilstm.");
  append(out, hidden1.parameters(prefix + "mlp1."));
  append(out, hidden2.parameters(prefix + "mlp2."));
  append(out, output.parameters(prefix + "mlp3."));
  return out;
}

std::size_t head_parameter_count(std::size_t in_width, std::size_t joint_hidden, std::size_t mlp_hidden1,
                                 std::size_t mlp_hidden2, std::size_t classes) {
  return bilstm_parameter_count(in_width, joint_hidden, ResidualMode::kOff) +
         (2 * joint_hidden + 1) * mlp_hidden1 + (mlp_hidden1 + 1) * mlp_hidden2 + (mlp_hidden2 + 1) * classes;
}

namespace {

Tensor linear(const LinearParams& p, const Tensor& x) { return add_bias(matmul(x, p.weight), p.bias); }

}  // namespace

Tensor head_logits(const PredictionHeadParams& head, const Tensor& a, const Tensor& v) {
  if (a.rank() != v.rank() || a.rank() < 2) {
    throw DimensionError("predict: audio " + to_string(a.shape()) + " and visual " + to_string(v.shape()) +
                         " are not matching sequence matrices");
  }
  const std::size_t axis = a.rank() - 1;
  if (a.dim(axis) + v.dim(axis) != head.joint.raw_dim) {
    throw DimensionError("predict: head expects width " + std::to_string(head.joint.raw_dim) + ", got " +
                         std::to_string(a.dim(axis)) + " + " + std::to_string(v.dim(axis)));
  }
  Tensor joint = bilstm_rerepresent(head.joint, concat({a, v}, axis));
  Shape out_shape = joint.shape();
  const std::size_t rows = joint.numel() / out_shape.back();
  Tensor x = reshape(joint, {rows, out_shape.back()});
  x = relu(linear(head.hidden1, x));
  x = relu(linear(head.hidden2, x));
  x = linear(head.output, x);
  out_shape.back() = head.classes();
  return reshape(x, out_shape);
}

Tensor predict(const PredictionHeadParams& head, const Tensor& a, const Tensor& v) {
  return sigmoid(head_logits(head, a, v));
}

Tensor one_hot(std::span<const std::uint8_t> labels, std::size_t classes) {
  if (labels.empty()) throw ContractError("one_hot: no labels");
  std::vector<double> y(labels.size() * classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) {
      throw ContractError("one_hot: label " + std::to_string(labels[i]) + " outside [0, " +
                          std::to_string(classes) + ")");
    }
    y[i * classes + labels[i]] = 1.0;
  }
  return Tensor::from({labels.size(), classes}, std::move(y));
}

Tensor mlsm_loss(const Tensor& scores, const Tensor& targets, bool strict) {
  if (scores.numel() != targets.numel() || scores.shape().back() != targets.shape().back()) {
    throw DimensionError("mlsm_loss: scores " + to_string(scores.shape()) + " vs targets " +
                         to_string(targets.shape()));
  }
  const std::size_t classes = scores.shape().back();
  if (strict) {
    const auto y = targets.data();
    for (std::size_t r = 0; r < y.size() / classes; ++r) {
      int hot = 0;
      for (std::size_t c = 0; c < classes; ++c) {
        const double v = y[r * classes + c];
        if (v == 1.0) {
          ++hot;
        } else if (v != 0.0) {
          hot = -1;
          break;
        }
      }
      if (hot != 1) throw ContractError("mlsm_loss: target row " + std::to_string(r) + " is not one-hot");
    }
  }
  Tensor y = targets.shape() == scores.shape() ? targets : reshape(targets, scores.shape());
  return mean(sub(softplus(scores), mul(y, scores)));
}

std::vector<std::size_t> argmax_rows(const Tensor& scores) {
  const std::size_t classes = scores.shape().back();
  const auto x = scores.data();
  std::vector<std::size_t> out(x.size() / classes);
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (x[r * classes + c] > x[r * classes + best]) best = c;
    }
    out[r] = best;
  }
  return out;
}

double segment_accuracy(const Tensor& predictions, std::span<const std::uint8_t> labels) {
  if (labels.empty()) throw ContractError("segment_accuracy: empty evaluation set");
  const auto pred = argmax_rows(predictions);
  if (pred.size() != labels.size()) {
    throw DimensionError("segment_accuracy: " + std::to_string(pred.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace ave
