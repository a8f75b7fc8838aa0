#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ave/early_fusion.hpp"
#include "ave/head.hpp"
#include "ave/jca.hpp"
#include "ave/parameters.hpp"
#include "ave/sequence_encoder.hpp"
#include "ave/tensor.hpp"

namespace ave {

struct ModelConfig {
  std::size_t segments = 10;  // N
  std::size_t audio_dim = 128;
  std::size_t visual_positions = 49;
  std::size_t visual_channels = 512;
  std::size_t d_a = 512;
  std::size_t d_v = 512;
  std::size_t k = 0;  // 0 means k = N
  std::size_t depth = 4;  // number of JCA layers
  FusionStrategy fusion{FusionCombine::kConcatenation, true};
  ResidualMode residual = ResidualMode::kInput;
  CoattentionMode coattention = CoattentionMode::kJoint;
  EarlyFusionKind early_fusion = EarlyFusionKind::kAudioGuided;
  std::size_t class_count = 29;
  std::size_t joint_hidden = 0;  // 0 means (d_a + d_v) / 2
  std::size_t mlp_hidden1 = 1024;
  std::size_t mlp_hidden2 = 256;

  std::size_t effective_k() const { return k == 0 ? segments : k; }
  std::size_t effective_joint_hidden() const { return joint_hidden == 0 ? (d_a + d_v) / 2 : joint_hidden; }
  JcaDims jca_dims() const { return {segments, effective_k(), d_a, d_v}; }

  // Throws ConfigError on non-positive extents, odd d_a/d_v (each encoder
  // direction has width d/2) or strategy-incompatible widths.
  void validate() const;
};

// Per-module parameter counts, in forward order.
struct ParameterBreakdown {
  std::vector<std::pair<std::string, std::size_t>> modules;
  std::size_t total() const;
  std::size_t module(const std::string& name) const;
};

// Exact count of learnable scalars, computed from the configuration alone.
ParameterBreakdown count_parameters(const ModelConfig& config);

// Batched model input.
struct ModelInput {
  Tensor audio;   // [B x N x audio_dim]
  Tensor visual;  // [B x N x positions x channels]
};

struct ModelOutput {
  Tensor logits;          // [B x N x C], pre-sigmoid
  Tensor visual_weights;  // [B x N x positions], audio-guided only
};

class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  ModelOutput forward(const ModelInput& input) const;

  // Every learnable block, named "<module>.<block>", in a fixed order.
  ParameterList parameters() const;

  EarlyFusionParams& early_fusion() { return early_fusion_; }
  JcaStack& jca() { return jca_; }
  const JcaStack& jca() const { return jca_; }

 private:
  ModelConfig config_;
  EarlyFusionParams early_fusion_;
  BiLstmParams audio_encoder_;
  BiLstmParams visual_encoder_;
  JcaStack jca_;
  PredictionHeadParams head_;
};

}  // namespace ave
