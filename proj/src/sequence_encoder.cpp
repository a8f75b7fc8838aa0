#include "ave/sequence_encoder.hpp"

#include <cmath>
#include <vector>

#include "ave/errors.hpp"
#include "ave/ops.hpp"

namespace ave {

LstmCellParams LstmCellParams::init(std::size_t in_dim, std::size_t hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  LstmCellParams p;
  p.in_dim = in_dim;
  p.hidden = hidden;
  p.input_weights = uniform_tensor({in_dim, 4 * hidden}, bound, rng);
  p.hidden_weights = uniform_tensor({hidden, 4 * hidden}, bound, rng);
  p.bias = uniform_tensor({4 * hidden}, bound, rng);
  auto b = p.bias.mutable_data();
  for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;
  return p;
}

LstmCellParams LstmCellParams::zeros(std::size_t in_dim, std::size_t hidden) {
  LstmCellParams p;
  p.in_dim = in_dim;
  p.hidden = hidden;
  p.input_weights = Tensor::zeros({in_dim, 4 * hidden}, true);
  p.hidden_weights = Tensor::zeros({hidden, 4 * hidden}, true);
  p.bias = Tensor::zeros({4 * hidden}, true);
  return p;
}

ParameterList LstmCellParams::parameters(const std::string& prefix) const {
  return {{prefix + "input_weights", input_weights},
          {prefix + "hidden_weights", hidden_weights},
          {prefix + "bias", bias}};
}

LstmState lstm_cell_step(const LstmCellParams& params, const Tensor& x, const LstmState& prev) {
  if (x.rank() != 2 || x.dim(1) != params.in_dim) {
    throw DimensionError("lstm_cell_step: input " + to_string(x.shape()) + " does not match in_dim " +
                         std::to_string(params.in_dim));
  }
  if (prev.h.shape() != Shape{x.dim(0), params.hidden} || prev.c.shape() != prev.h.shape()) {
    throw DimensionError("lstm_cell_step: state " + to_string(prev.h.shape()) + "/" +
                         to_string(prev.c.shape()) + " does not match hidden " +
                         std::to_string(params.hidden));
  }
  const std::size_t h = params.hidden;
  Tensor z = add_bias(add(matmul(x, params.input_weights), matmul(prev.h, params.hidden_weights)),
                      params.bias);
  auto gates = split(z, 1, {h, h, h, h});
  Tensor in_gate = sigmoid(gates[0]);
  Tensor forget_gate = sigmoid(gates[1]);
  Tensor out_gate = sigmoid(gates[2]);
  Tensor candidate = tanh(gates[3]);
  Tensor c = add(mul(forget_gate, prev.c), mul(in_gate, candidate));
  Tensor hn = mul(out_gate, tanh(c));
  return {hn, c};
}

BiLstmParams BiLstmParams::init(std::size_t raw_dim, std::size_t hidden, ResidualMode residual, Rng& rng) {
  BiLstmParams p;
  p.raw_dim = raw_dim;
  p.hidden = hidden;
  p.residual = residual;
  const std::size_t in_dim = residual == ResidualMode::kInput ? raw_dim + hidden : raw_dim;
  p.forward_cell = LstmCellParams::init(in_dim, hidden, rng);
  p.backward_cell = LstmCellParams::init(in_dim, hidden, rng);
  if (residual == ResidualMode::kOutput) {
    p.residual_proj = uniform_tensor({raw_dim, 2 * hidden}, 1.0 / std::sqrt(static_cast<double>(raw_dim)), rng);
  }
  return p;
}

ParameterList BiLstmParams::parameters(const std::string& prefix) const {
  ParameterList out = forward_cell.parameters(prefix + "forward.");
  append(out, backward_cell.parameters(prefix + "backward."));
  if (residual == ResidualMode::kOutput) out.push_back({prefix + "residual_proj", residual_proj});
  return out;
}

std::size_t bilstm_parameter_count(std::size_t raw_dim, std::size_t hidden, ResidualMode residual) {
  const std::size_t in_dim = residual == ResidualMode::kInput ? raw_dim + hidden : raw_dim;
  std::size_t n = 2 * (4 * hidden * (in_dim + hidden + 1));
  if (residual == ResidualMode::kOutput) n += raw_dim * 2 * hidden;
  return n;
}

namespace {

std::vector<Tensor> run_direction(const LstmCellParams& cell, const std::vector<Tensor>& steps,
                                  bool reverse, bool feed_previous) {
  const std::size_t n = steps.size();
  const std::size_t batch = steps.front().dim(0);
  LstmState state{Tensor::zeros({batch, cell.hidden}), Tensor::zeros({batch, cell.hidden})};
  std::vector<Tensor> outputs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = reverse ? n - 1 - i : i;
    Tensor x = feed_previous ? concat({state.h, steps[t]}, 1) : steps[t];
    state = lstm_cell_step(cell, x, state);
    outputs[t] = state.h;
  }
  return outputs;
}

}  // namespace

Tensor bilstm_rerepresent(const BiLstmParams& params, const Tensor& seq) {
  if (!seq.defined() || (seq.rank() != 2 && seq.rank() != 3)) {
    throw ContractError("bilstm_rerepresent: expected [N x d] or [B x N x d] sequence");
  }
  const bool batched = seq.rank() == 3;
  Tensor x = batched ? seq : reshape(seq, {1, seq.dim(0), seq.dim(1)});
  const std::size_t batch = x.dim(0), n = x.dim(1), raw = x.dim(2);
  if (n == 0) throw ContractError("bilstm_rerepresent: empty sequence");
  if (raw != params.raw_dim) {
    throw DimensionError("bilstm_rerepresent: feature width " + std::to_string(raw) +
                         " does not match encoder input " + std::to_string(params.raw_dim));
  }

  std::vector<Tensor> steps;
  steps.reserve(n);
  for (std::size_t t = 0; t < n; ++t) steps.push_back(reshape(slice(x, 1, t, t + 1), {batch, raw}));

  const bool feed = params.residual == ResidualMode::kInput;
  auto fwd = run_direction(params.forward_cell, steps, false, feed);
  auto bwd = run_direction(params.backward_cell, steps, true, feed);

  std::vector<Tensor> rows;
  rows.reserve(n);
  const std::size_t width = params.out_dim();
  for (std::size_t t = 0; t < n; ++t) {
    rows.push_back(reshape(concat({bwd[t], fwd[t]}, 1), {batch, 1, width}));
  }
  Tensor out = n == 1 ? rows.front() : concat(rows, 1);
  if (params.residual == ResidualMode::kOutput) {
    out = add(out, matmul_batched_rhs(x, params.residual_proj));
  }
  return batched ? out : reshape(out, {n, width});
}

}  // namespace ave
