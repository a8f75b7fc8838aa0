#pragma once

#include <cstdint>
#include <random>

#include "ave/tensor.hpp"

namespace ave {

using Rng = std::mt19937_64;

// Parameter tensor with entries uniform in [-bound, bound].
inline Tensor uniform_tensor(Shape shape, double bound, Rng& rng, bool requires_grad = true) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(numel(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(values), requires_grad);
}

}  // namespace ave
