#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ave/parameters.hpp"
#include "ave/random.hpp"
#include "ave/sequence_encoder.hpp"
#include "ave/tensor.hpp"

namespace ave {

struct LinearParams {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]

  static LinearParams init(std::size_t in, std::size_t out, Rng& rng);
  ParameterList parameters(const std::string& prefix) const;
};

// Joint Bi-LSTM over [A ; V] followed by linear -> relu -> linear -> relu ->
// linear to the class scores.
struct PredictionHeadParams {
  BiLstmParams joint;
  LinearParams hidden1;
  LinearParams hidden2;
  LinearParams output;

  static PredictionHeadParams init(std::size_t in_width, std::size_t joint_hidden, std::size_t mlp_hidden1,
                                   std::size_t mlp_hidden2, std::size_t classes, Rng& rng);
  std::size_t classes() const { return output.bias.numel(); }
  ParameterList parameters(const std::string& prefix) const;
};

std::size_t head_parameter_count(std::size_t in_width, std::size_t joint_hidden, std::size_t mlp_hidden1,
                                 std::size_t mlp_hidden2, std::size_t classes);

// Pre-sigmoid class scores, [B x N x C] (or [N x C] for unbatched input).
Tensor head_logits(const PredictionHeadParams& head, const Tensor& a, const Tensor& v);

// sigmoid(head_logits); the predicted class of a segment is its argmax.
Tensor predict(const PredictionHeadParams& head, const Tensor& a, const Tensor& v);

// Dense [rows x classes] target matrix with one hot entry per segment.
Tensor one_hot(std::span<const std::uint8_t> labels, std::size_t classes);

// Multi-label soft-margin loss on pre-sigmoid scores, averaged over classes and
// over every segment row:
//   mean_rows( -(1/C) sum_c [y log s(x) + (1-y) log s(-x)] )
// evaluated as softplus(x) - y*x. With `strict`, targets must be one-hot.
Tensor mlsm_loss(const Tensor& scores, const Tensor& targets, bool strict = false);

// Row-wise argmax of a [.. x C] score tensor.
std::vector<std::size_t> argmax_rows(const Tensor& scores);

// Fraction of segments whose argmax equals the label.
double segment_accuracy(const Tensor& predictions, std::span<const std::uint8_t> labels);

}  // namespace ave
