#include "ave/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "ave/errors.hpp"

namespace ave {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kIo: return "io";
    case ParseErrorKind::kBadMagic: return "bad-magic";
    case ParseErrorKind::kBadVersion: return "bad-version";
    case ParseErrorKind::kTruncated: return "truncated";
    case ParseErrorKind::kLabelOutOfRange: return "label-out-of-range";
    case ParseErrorKind::kBadChecksum: return "bad-checksum";
    case ParseErrorKind::kMalformed: return "malformed";
  }
  return "unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::uint64_t offset,
                       const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " at byte " +
                         std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  for (auto e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + to_string(shape));
  }
}

thread_local bool g_grad_enabled = true;

}  // namespace

Tensor make_tensor(std::shared_ptr<detail::TensorImpl> impl) {
  return Tensor(std::move(impl));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  check_shape(shape);
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->data.assign(ave::numel(shape), value);
  impl->shape = std::move(shape);
  Tensor t(std::move(impl));
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape);
  if (ave::numel(shape) != values.size()) {
    throw DimensionError("shape " + to_string(shape) + " needs " +
                         std::to_string(ave::numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  Tensor t(std::move(impl));
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         to_string(shape()));
  }
  return impl_->shape[axis];
}

std::size_t Tensor::numel() const { return impl_->data.size(); }

std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item() on non-scalar tensor " + to_string(shape()));
  }
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (on) {
    impl_->grad.assign(impl_->data.size(), 0.0);
  } else {
    impl_->grad.clear();
    impl_->grad.shrink_to_fit();
  }
}

bool Tensor::has_grad() const { return impl_->requires_grad; }
std::span<const double> Tensor::grad() const { return impl_->grad; }
std::span<double> Tensor::mutable_grad() { return impl_->grad; }

void Tensor::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

std::uint64_t Tensor::tape_id() const { return impl_->tape_id; }

Tensor Tensor::detach() const {
  return from(impl_->shape, impl_->data, false);
}

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

std::uint64_t Tape::record(BackwardFn fn) {
  nodes_.push_back(std::move(fn));
  return nodes_.size();
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
  ++generation_;
}

void Tape::run_backward(std::uint64_t last_id) {
  if (consumed_) {
    throw ContractError("backward already ran on this tape; reset it first");
  }
  consumed_ = true;
  for (std::uint64_t id = last_id; id >= 1; --id) {
    nodes_[id - 1]();
  }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward needs a scalar loss, got " +
                        (loss.defined() ? to_string(loss.shape()) : std::string("undefined")));
  }
  if (!loss.requires_grad()) {
    throw ContractError("loss does not depend on any tensor that requires grad");
  }
  auto& tape = Tape::current();
  auto* impl = loss.impl();
  impl->grad[0] += 1.0;
  if (impl->tape_id == 0) return;  // loss is itself a leaf
  if (impl->tape_generation != tape.generation() || impl->tape_id > tape.size()) {
    throw ContractError("loss was not recorded on the active tape");
  }
  tape.run_backward(impl->tape_id);
}

}  // namespace ave
