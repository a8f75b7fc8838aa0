#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ave {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty unless requires_grad
  bool requires_grad = false;
  // Position of the producing node on the tape, or 0 for leaves.
  std::uint64_t tape_id = 0;
  std::uint64_t tape_generation = 0;
};

}  // namespace detail

// Dense row-major float64 array. Copies share storage (handle semantics), so a
// parameter tensor captured by the tape is the same object the optimizer
// updates.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t flat) const { return data()[flat]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  std::uint64_t tape_id() const;

  // Deep copy of the values with no tape linkage.
  Tensor detach() const;

  detail::TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl)
      : impl_(std::move(impl)) {}
  friend Tensor make_tensor(std::shared_ptr<detail::TensorImpl>);

  std::shared_ptr<detail::TensorImpl> impl_;
};

Tensor make_tensor(std::shared_ptr<detail::TensorImpl> impl);

// Ordered record of differentiable operations on one thread. Nodes are appended
// in execution order, which is a topological order of the computation graph.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  static Tape& current();

  // Appends a node and returns its 1-based id.
  std::uint64_t record(BackwardFn fn);
  std::size_t size() const { return nodes_.size(); }
  std::uint64_t generation() const { return generation_; }
  void reset();

  // Runs every node up to and including `last_id` in reverse order.
  void run_backward(std::uint64_t last_id);

 private:
  std::vector<BackwardFn> nodes_;
  std::uint64_t generation_ = 1;
  bool consumed_ = false;
};

// Whether operations currently record on the tape (thread-local).
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Populates the grad buffer of every requires_grad tensor reachable from
// `loss`. Leaf gradients accumulate across calls; call Tape::reset() between
// training steps.
void backward(const Tensor& loss);

}  // namespace ave
