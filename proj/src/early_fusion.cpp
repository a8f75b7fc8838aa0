#include "ave/early_fusion.hpp"

#include <cmath>

#include "ave/errors.hpp"
#include "ave/ops.hpp"

namespace ave {

EarlyFusionParams EarlyFusionParams::init(std::size_t audio_dim, std::size_t channels, Rng& rng) {
  return {uniform_tensor({channels, audio_dim}, 1.0 / std::sqrt(static_cast<double>(audio_dim)), rng)};
}

ParameterList EarlyFusionParams::parameters(const std::string& prefix) const {
  return {{prefix + "audio_proj", audio_proj}};
}

PooledVisual audio_guided_pool(const EarlyFusionParams& params, const Tensor& audio, const Tensor& grid) {
  const bool single = grid.rank() == 2;
  if (single ? audio.rank() != 1 : (audio.rank() != 2 || grid.rank() != 3)) {
    throw DimensionError("audio_guided_pool: expected audio [S x Da] with grid [S x P x C], got " +
                         to_string(audio.shape()) + " and " + to_string(grid.shape()));
  }
  Tensor a = single ? reshape(audio, {1, audio.dim(0)}) : audio;
  Tensor g = single ? reshape(grid, {1, grid.dim(0), grid.dim(1)}) : grid;
  const std::size_t segments = g.dim(0), positions = g.dim(1), channels = g.dim(2);
  if (a.dim(0) != segments) {
    throw DimensionError("audio_guided_pool: " + std::to_string(a.dim(0)) + " audio rows for " +
                         std::to_string(segments) + " visual grids");
  }
  if (params.audio_proj.shape() != Shape{channels, a.dim(1)}) {
    throw DimensionError("audio_guided_pool: projection " + to_string(params.audio_proj.shape()) +
                         " does not map audio width " + std::to_string(a.dim(1)) + " to " +
                         std::to_string(channels) + " channels");
  }

  Tensor query = reshape(matmul(a, transpose(params.audio_proj)), {segments, channels, 1});
  Tensor scores = reshape(bmm(g, query), {segments, positions});
  Tensor weights = softmax(scale(scores, 1.0 / std::sqrt(static_cast<double>(channels))), 1);
  Tensor pooled = reshape(bmm(reshape(weights, {segments, 1, positions}), g), {segments, channels});
  if (single) {
    return {reshape(pooled, {channels}), reshape(weights, {positions})};
  }
  return {pooled, weights};
}

Tensor baseline_pool(const Tensor& grid, EarlyFusionKind kind) {
  if (grid.rank() != 2 && grid.rank() != 3) {
    throw DimensionError("baseline_pool: expected [P x C] or [S x P x C], got " + to_string(grid.shape()));
  }
  const std::size_t axis = grid.rank() - 2;
  switch (kind) {
    case EarlyFusionKind::kAverage: return reduce_mean(grid, axis);
    case EarlyFusionKind::kMax: return reduce_max(grid, axis);
    case EarlyFusionKind::kAudioGuided: break;
  }
  throw ContractError("baseline_pool: audio-guided pooling needs audio_guided_pool");
}

}  // namespace ave
