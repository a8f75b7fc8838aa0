#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ave/tensor.hpp"

// Differentiable operations. Each op records its local gradient rule on the
// thread's active Tape when grad mode is on and any input requires grad.
// Binary elementwise ops require identical shapes; there is no broadcasting
// except the explicit add_bias and tile_batch.
namespace ave {

// [m x n] . [n x p]
Tensor matmul(const Tensor& a, const Tensor& b);
// Batched: [B x m x n] . [B x n x p]
Tensor bmm(const Tensor& a, const Tensor& b);
// Rank-3 by rank-2: [B x m x n] . [n x p], applied to every batch item.
Tensor matmul_batched_rhs(const Tensor& a, const Tensor& w);
// Swaps the last two axes of a rank-2 or rank-3 tensor.
Tensor transpose(const Tensor& t);
Tensor reshape(const Tensor& t, Shape shape);
// Repeats `t` along a new leading axis of extent `batch`.
Tensor tile_batch(const Tensor& t, std::size_t batch);

Tensor concat(const std::vector<Tensor>& tensors, std::size_t axis);
std::vector<Tensor> split(const Tensor& t, std::size_t axis,
                          const std::vector<std::size_t>& extents);
Tensor slice(const Tensor& t, std::size_t axis, std::size_t begin, std::size_t end);

enum class Elementwise { kAdd, kSub, kMul };
Tensor elementwise(const Tensor& a, const Tensor& b, Elementwise kind);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& t, double s);
// Adds a vector of the last-axis extent to every row.
Tensor add_bias(const Tensor& t, const Tensor& bias);

enum class Activation { kTanh, kRelu, kSigmoid, kSoftplus, kSoftmax };
// `axis` is used by kSoftmax only.
Tensor activation(const Tensor& t, Activation kind, std::size_t axis = 0);
Tensor tanh(const Tensor& t);
Tensor relu(const Tensor& t);
Tensor sigmoid(const Tensor& t);
Tensor softplus(const Tensor& t);
Tensor softmax(const Tensor& t, std::size_t axis);

// Full reduction to a shape-[1] tensor.
Tensor sum(const Tensor& t);
Tensor mean(const Tensor& t);
// Reduction along one axis; that axis is removed from the shape.
Tensor reduce_mean(const Tensor& t, std::size_t axis);
Tensor reduce_max(const Tensor& t, std::size_t axis);

// Non-differentiable branches (relu, max) fold the sign/argmax pattern they
// take into a thread-local fingerprint while monitoring is on. Gradient
// checking uses it to detect finite-difference steps that cross a kink.
namespace kink {
void start();
std::uint64_t fingerprint();
void stop();
}  // namespace kink

// Test hook: scales the input gradient of one op kind by 1.01 so that
// negative-control gradient checks can be exercised. Names: "tanh", "sigmoid",
// "relu", "matmul", "bmm", "softmax". std::nullopt clears the fault.
void set_gradient_fault(std::optional<std::string_view> op);

}  // namespace ave
