#pragma once

#include <string>
#include <vector>

#include "ave/tensor.hpp"

namespace ave {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<NamedParameter>;

inline void append(ParameterList& out, const ParameterList& more) {
  out.insert(out.end(), more.begin(), more.end());
}

inline std::size_t total_size(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.numel();
  return n;
}

}  // namespace ave
