#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "ave/parameters.hpp"
#include "ave/random.hpp"
#include "ave/tensor.hpp"

namespace ave {

// One LSTM direction. The four gate blocks are stacked along the output axis in
// the order input, forget, output, candidate:
//   input_weights  [in_dim x 4*hidden]
//   hidden_weights [hidden x 4*hidden]
//   bias           [4*hidden]
struct LstmCellParams {
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  Tensor input_weights;
  Tensor hidden_weights;
  Tensor bias;

  // Uniform in [-1/sqrt(hidden), 1/sqrt(hidden)], forget-gate bias 1.
  static LstmCellParams init(std::size_t in_dim, std::size_t hidden, Rng& rng);
  static LstmCellParams zeros(std::size_t in_dim, std::size_t hidden);

  ParameterList parameters(const std::string& prefix) const;
};

struct LstmState {
  Tensor h;  // [B x hidden]
  Tensor c;  // [B x hidden]
};

// Single time step over a batch: x [B x in_dim], state [B x hidden].
LstmState lstm_cell_step(const LstmCellParams& params, const Tensor& x, const LstmState& prev);

// How the raw segment feature enters the re-representation.
enum class ResidualMode {
  kOff,     // plain Bi-LSTM over s_t
  kInput,   // step input is [previous output of this direction ; s_t]
  kOutput,  // plain Bi-LSTM, then a learned projection of s_t added to f_t
};

struct BiLstmParams {
  std::size_t raw_dim = 0;
  std::size_t hidden = 0;
  ResidualMode residual = ResidualMode::kInput;
  LstmCellParams forward_cell;
  LstmCellParams backward_cell;
  Tensor residual_proj;  // [raw_dim x 2*hidden], kOutput only

  static BiLstmParams init(std::size_t raw_dim, std::size_t hidden, ResidualMode residual, Rng& rng);

  std::size_t out_dim() const { return 2 * hidden; }
  ParameterList parameters(const std::string& prefix) const;
};

// Shapes of the blocks `BiLstmParams::init` would allocate.
std::size_t bilstm_parameter_count(std::size_t raw_dim, std::size_t hidden, ResidualMode residual);

// seq: [N x raw_dim] or [B x N x raw_dim]; returns the same rank with the last
// axis replaced by 2*hidden. Each output row is [backward_t ; forward_t].
Tensor bilstm_rerepresent(const BiLstmParams& params, const Tensor& seq);

}  // namespace ave
