#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ave/tensor.hpp"

namespace ave {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, so entries whose true gradient
  // is ~0 are judged by absolute error instead.
  double error_floor = 1e-6;
};

struct InputGradReport {
  std::string name;
  std::size_t checked = 0;
  // Entries whose +/- step crossed a relu or max kink.
  std::size_t excluded = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckReport {
  std::vector<InputGradReport> inputs;
  bool passed = true;
  double max_rel_error = 0.0;
};

// Compares tape gradients of `f` against central finite differences for
// every entry of every input. `f` must rebuild its computation from the
// current input values on each call and return a scalar.
GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs,
                           const std::vector<std::string>& names = {},
                           const GradCheckOptions& options = {});

}  // namespace ave
