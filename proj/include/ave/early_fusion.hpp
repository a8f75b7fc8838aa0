#pragma once

#include <cstddef>
#include <string>

#include "ave/parameters.hpp"
#include "ave/random.hpp"
#include "ave/tensor.hpp"

namespace ave {

enum class EarlyFusionKind { kAudioGuided, kAverage, kMax };

struct EarlyFusionParams {
  // [channels x audio_dim]; maps an audio vector into the visual channel space.
  Tensor audio_proj;

  static EarlyFusionParams init(std::size_t audio_dim, std::size_t channels, Rng& rng);
  ParameterList parameters(const std::string& prefix) const;
};

struct PooledVisual {
  Tensor pooled;   // [S x channels]
  Tensor weights;  // [S x positions], rows sum to 1
};

// Scaled dot-product attention of each segment's audio over the spatial
// positions of its visual grid.
//   audio: [S x audio_dim] (or [audio_dim] for one segment)
//   grid:  [S x positions x channels] (or [positions x channels])
PooledVisual audio_guided_pool(const EarlyFusionParams& params, const Tensor& audio, const Tensor& grid);

// Per-channel mean or max over positions. grid: [S x P x C] or [P x C].
Tensor baseline_pool(const Tensor& grid, EarlyFusionKind kind);

}  // namespace ave
