#include "ave/model.hpp"

#include <tuple>

#include "ave/errors.hpp"
#include "ave/ops.hpp"
#include "ave/random.hpp"

namespace ave {

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(segments, "N");
  positive(audio_dim, "audio_dim");
  positive(visual_positions, "visual_positions");
  positive(visual_channels, "visual_channels");
  positive(d_a, "d_a");
  positive(d_v, "d_v");
  positive(class_count, "class_count");
  positive(mlp_hidden1, "mlp_hidden1");
  positive(mlp_hidden2, "mlp_hidden2");
  if (d_a % 2 != 0 || d_v % 2 != 0) {
    throw ConfigError("d_a and d_v must be even (each Bi-LSTM direction has width d/2), got " +
                      std::to_string(d_a) + " and " + std::to_string(d_v));
  }
  if (class_count > 255) throw ConfigError("class_count must fit a label byte below 255");
  try {
    joint_width(fusion, d_a, d_v);
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
}

std::size_t ParameterBreakdown::total() const {
  std::size_t n = 0;
  for (const auto& [name, count] : modules) n += count;
  return n;
}

std::size_t ParameterBreakdown::module(const std::string& name) const {
  for (const auto& [m, count] : modules) {
    if (m == name) return count;
  }
  return 0;
}

ParameterBreakdown count_parameters(const ModelConfig& config) {
  config.validate();
  ParameterBreakdown b;
  b.modules.emplace_back("early_fusion", config.early_fusion == EarlyFusionKind::kAudioGuided
                                             ? config.visual_channels * config.audio_dim
                                             : 0);
  b.modules.emplace_back("audio_encoder", bilstm_parameter_count(config.audio_dim, config.d_a / 2, config.residual));
  b.modules.emplace_back("visual_encoder",
                         bilstm_parameter_count(config.visual_channels, config.d_v / 2, config.residual));
  b.modules.emplace_back("jca", config.depth * jca_layer_parameter_count(config.jca_dims(), config.fusion,
                                                                         config.coattention));
  b.modules.emplace_back("head", head_parameter_count(config.d_a + config.d_v, config.effective_joint_hidden(),
                                                      config.mlp_hidden1, config.mlp_hidden2, config.class_count));
  return b;
}

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  if (config_.early_fusion == EarlyFusionKind::kAudioGuided) {
    early_fusion_ = EarlyFusionParams::init(config_.audio_dim, config_.visual_channels, rng);
  }
  audio_encoder_ = BiLstmParams::init(config_.audio_dim, config_.d_a / 2, config_.residual, rng);
  visual_encoder_ = BiLstmParams::init(config_.visual_channels, config_.d_v / 2, config_.residual, rng);
  jca_ = JcaStack::init(config_.jca_dims(), config_.fusion, config_.coattention, config_.depth, rng);
  head_ = PredictionHeadParams::init(config_.d_a + config_.d_v, config_.effective_joint_hidden(),
                                     config_.mlp_hidden1, config_.mlp_hidden2, config_.class_count, rng);
}

ParameterList Model::parameters() const {
  ParameterList out;
  if (config_.early_fusion == EarlyFusionKind::kAudioGuided) append(out, early_fusion_.parameters("early_fusion."));
  append(out, audio_encoder_.parameters("audio_encoder."));
  append(out, visual_encoder_.parameters("visual_encoder."));
  append(out, jca_.parameters("jca."));
  append(out, head_.parameters("head."));
  return out;
}

ModelOutput Model::forward(const ModelInput& input) const {
  const auto& c = config_;
  const Tensor& audio = input.audio;
  const Tensor& visual = input.visual;
  if (audio.rank() != 3 || audio.dim(1) != c.segments || audio.dim(2) != c.audio_dim) {
    throw DimensionError("model: audio batch " + to_string(audio.shape()) + " does not match [B x " +
                         std::to_string(c.segments) + " x " + std::to_string(c.audio_dim) + "]");
  }
  const std::size_t batch = audio.dim(0);
  if (visual.shape() != Shape{batch, c.segments, c.visual_positions, c.visual_channels}) {
    throw DimensionError("model: visual batch " + to_string(visual.shape()) + " does not match [" +
                         std::to_string(batch) + " x " + std::to_string(c.segments) + " x " +
                         std::to_string(c.visual_positions) + " x " + std::to_string(c.visual_channels) + "]");
  }
  const std::size_t segs = batch * c.segments;
  Tensor grids = reshape(visual, {segs, c.visual_positions, c.visual_channels});

  ModelOutput out;
  Tensor pooled;
  if (c.early_fusion == EarlyFusionKind::kAudioGuided) {
    auto p = audio_guided_pool(early_fusion_, reshape(audio, {segs, c.audio_dim}), grids);
    pooled = p.pooled;
    out.visual_weights = reshape(p.weights, {batch, c.segments, c.visual_positions});
  } else {
    pooled = baseline_pool(grids, c.early_fusion);
  }

  Tensor a = bilstm_rerepresent(audio_encoder_, audio);
  Tensor v = bilstm_rerepresent(visual_encoder_, reshape(pooled, {batch, c.segments, c.visual_channels}));
  std::tie(a, v) = jca_stack_forward(jca_, a, v);
  out.logits = head_logits(head_, a, v);
  return out;
}

}  // namespace ave
