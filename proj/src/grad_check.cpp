#include "ave/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "ave/errors.hpp"
#include "ave/ops.hpp"

namespace ave {
namespace {

struct Probe {
  double value;
  std::uint64_t kinks;
};

Probe evaluate(const std::function<Tensor()>& f) {
  NoGradGuard no_grad;
  kink::start();
  Tensor out = f();
  const std::uint64_t fp = kink::fingerprint();
  kink::stop();
  if (out.numel() != 1) {
    throw ContractError("grad_check: function must return a scalar, got " + to_string(out.shape()));
  }
  return {out.item(), fp};
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs,
                           const std::vector<std::string>& names, const GradCheckOptions& options) {
  std::vector<bool> restore(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (double v : inputs[i].data()) {
      if (!std::isfinite(v)) throw ContractError("grad_check: non-finite input value");
    }
    restore[i] = inputs[i].requires_grad();
    inputs[i].set_requires_grad(true);
  }

  // Analytic pass.
  Tape::current().reset();
  Tensor loss = f();
  if (loss.numel() != 1) {
    Tape::current().reset();
    throw ContractError("grad_check: function must return a scalar, got " + to_string(loss.shape()));
  }
  backward(loss);
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());
  Tape::current().reset();

  const std::uint64_t base_kinks = evaluate(f).kinks;

  GradCheckReport report;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    InputGradReport r;
    r.name = i < names.size() ? names[i] : "input" + std::to_string(i);
    auto data = inputs[i].mutable_data();
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double x = data[j];
      data[j] = x + options.step;
      const double up_step = data[j] - x;
      const Probe up = evaluate(f);
      data[j] = x - options.step;
      const double down_step = x - data[j];
      const Probe down = evaluate(f);
      data[j] = x;
      if (up.kinks != base_kinks || down.kinks != base_kinks) {
        ++r.excluded;
        continue;
      }
      const double numeric = (up.value - down.value) / (up_step + down_step);
      const double a = analytic[i][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.error_floor});
      const double err = std::abs(a - numeric) / denom;
      ++r.checked;
      if (err >= r.max_rel_error) {
        r.max_rel_error = err;
        r.worst_index = j;
        r.worst_analytic = a;
        r.worst_numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
    if (r.max_rel_error > options.tolerance) report.passed = false;
    report.inputs.push_back(std::move(r));
  }

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    inputs[i].set_requires_grad(restore[i]);
  }
  return report;
}

}  // namespace ave
