#pragma once

#include <cstddef>
#include <vector>

#include "ave/parameters.hpp"

namespace ave {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive moment estimation over a fixed parameter list.
class Adam {
 public:
  Adam(ParameterList params, AdamOptions options = {});

  // Applies one update from the accumulated grads, then zeroes them.
  void step();
  void zero_grad();
  std::size_t steps_taken() const { return steps_; }

 private:
  ParameterList params_;
  AdamOptions options_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  std::size_t steps_ = 0;
};

}  // namespace ave
