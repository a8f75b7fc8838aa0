#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ave/parameters.hpp"
#include "ave/random.hpp"
#include "ave/tensor.hpp"

// Joint co-attention: the audio and visual sequence matrices A [N x d_a] and
// V [N x d_v] are fused into a joint representation J [N x d], which attends
// back to each modality. A layer computes
//
//   C_a = tanh(A^T W_ja J / sqrt(d))          [d_a x d]
//   C_v = tanh(V^T W_jv J / sqrt(d))          [d_v x d]
//   H_a = relu(W_a A + W_ca C_a^T)            [k x d_a]
//   H_v = relu(W_v V + W_cv C_v^T)            [k x d_v]
//   A'  = A + W_ha^T H_a,  V' = V + W_hv^T H_v
//
// and layers stack with independent parameters. Every function accepts either
// single sequences ([N x d]) or batches ([B x N x d]); weights are shared
// across the batch.
namespace ave {

enum class FusionCombine { kAddition, kMultiplication, kConcatenation };

struct FusionStrategy {
  FusionCombine combine = FusionCombine::kConcatenation;
  // Learned linear map (with bias) from the combined representation to width d.
  bool fc = true;

  std::string name() const;
  static FusionStrategy parse(const std::string& name);
};

// kJoint attends from J; kOriginal replaces J with the opposite modality
// (audio attends to visual and vice versa).
enum class CoattentionMode { kJoint, kOriginal };

struct JcaDims {
  std::size_t segments = 10;  // N
  std::size_t k = 10;
  std::size_t d_a = 512;
  std::size_t d_v = 512;
};

// Width of J for the strategy. Throws DimensionError if addition or
// multiplication is asked to combine unequal widths.
std::size_t joint_width(const FusionStrategy& strategy, std::size_t d_a, std::size_t d_v);

struct JcaLayerParams {
  Tensor w_ja;  // [N x N]
  Tensor w_jv;  // [N x N]
  Tensor w_a;   // [k x N]
  Tensor w_v;   // [k x N]
  Tensor w_ca;  // [k x d]   (k x d_v in original mode)
  Tensor w_cv;  // [k x d]   (k x d_a in original mode)
  Tensor w_ha;  // [k x N]
  Tensor w_hv;  // [k x N]
  Tensor fc_weight;  // [d_in x d], fc strategies in joint mode only
  Tensor fc_bias;    // [d]

  static JcaLayerParams init(const JcaDims& dims, const FusionStrategy& strategy, CoattentionMode mode,
                             Rng& rng);
  static JcaLayerParams zeros(const JcaDims& dims, const FusionStrategy& strategy, CoattentionMode mode);

  ParameterList parameters(const std::string& prefix) const;
};

std::size_t jca_layer_parameter_count(const JcaDims& dims, const FusionStrategy& strategy,
                                      CoattentionMode mode);

Tensor joint_representation(const FusionStrategy& strategy, const Tensor& a, const Tensor& v,
                            const Tensor& fc_weight = {}, const Tensor& fc_bias = {});

// tanh(X^T W J / sqrt(d)): [N x d_m], [N x N], [N x d] -> [d_m x d].
Tensor affinity(const Tensor& x, const Tensor& w, const Tensor& j, double d);

// relu(W_m X + W_c C^T): [k x N], [N x d_m], [k x d], [d_m x d] -> [k x d_m].
Tensor attention_map(const Tensor& w_m, const Tensor& x, const Tensor& w_c, const Tensor& c);

std::pair<Tensor, Tensor> attention_maps(const JcaLayerParams& params, const Tensor& a, const Tensor& v,
                                         const Tensor& c_a, const Tensor& c_v);

struct JcaLayerTrace {
  Tensor joint;
  Tensor c_a, c_v;
  Tensor h_a, h_v;
  Tensor a_out, v_out;
};

JcaLayerTrace jca_layer_trace(const JcaLayerParams& params, const FusionStrategy& strategy,
                              CoattentionMode mode, const Tensor& a, const Tensor& v);

std::pair<Tensor, Tensor> jca_layer(const JcaLayerParams& params, const FusionStrategy& strategy,
                                    CoattentionMode mode, const Tensor& a, const Tensor& v);

struct JcaStack {
  JcaDims dims;
  FusionStrategy strategy;
  CoattentionMode mode = CoattentionMode::kJoint;
  std::vector<JcaLayerParams> layers;

  static JcaStack init(const JcaDims& dims, const FusionStrategy& strategy, CoattentionMode mode,
                       std::size_t depth, Rng& rng);
  ParameterList parameters(const std::string& prefix) const;
};

// Applies the layers in order; depth 0 returns the inputs unchanged.
std::pair<Tensor, Tensor> jca_stack_forward(const JcaStack& stack, const Tensor& a, const Tensor& v);

}  // namespace ave
