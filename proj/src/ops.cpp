#include "ave/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ave/errors.hpp"

namespace ave {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

std::optional<std::string> g_fault;

double fault_factor(std::string_view op) {
  return (g_fault && *g_fault == op) ? 1.01 : 1.0;
}

thread_local bool g_kink_active = false;
thread_local std::uint64_t g_kink_hash = 1469598103934665603ull;

void kink_fold(std::uint64_t v) {
  g_kink_hash ^= v + 0x9e3779b97f4a7c15ull + (g_kink_hash << 6) + (g_kink_hash >> 2);
}

bool tracked(std::initializer_list<const Tensor*> inputs) {
  if (!grad_enabled()) return false;
  for (const auto* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Tensor result(Shape shape, std::vector<double> data, bool needs_grad) {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  if (needs_grad) {
    impl->requires_grad = true;
    impl->grad.assign(impl->data.size(), 0.0);
  }
  return make_tensor(std::move(impl));
}

void attach(const Tensor& out, Tape::BackwardFn fn) {
  auto& tape = Tape::current();
  out.impl()->tape_id = tape.record(std::move(fn));
  out.impl()->tape_generation = tape.generation();
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                         " vs " + to_string(b.shape()));
  }
}

struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

void require_axis(const Tensor& t, std::size_t axis, const char* op) {
  if (axis >= t.rank()) {
    throw DimensionError(std::string(op) + ": invalid axis " + std::to_string(axis) +
                         " for shape " + to_string(t.shape()));
  }
}

template <class Fwd, class Deriv>
Tensor unary(const Tensor& t, std::string_view name, Fwd fwd, Deriv deriv) {
  const auto x = t.data();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  Tensor out = result(t.shape(), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), deriv, f = fault_factor(name)] {
      auto& gx = ti->grad;
      const auto& gy = oi->grad;
      for (std::size_t i = 0; i < gy.size(); ++i) {
        gx[i] += f * gy[i] * deriv(ti->data[i], oi->data[i]);
      }
    });
  }
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  if (b.dim(0) != n) {
    throw DimensionError("matmul: inner extents differ, " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  std::vector<double> c(m * p);
  MutMap(c.data(), m, p).noalias() = ConstMap(a.data().data(), m, n) * ConstMap(b.data().data(), n, p);
  Tensor out = result({m, p}, std::move(c), tracked({&a, &b}));
  if (out.requires_grad()) {
    attach(out, [ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr(), m, n, p,
                 f = fault_factor("matmul")] {
      ConstMap go(oi->grad.data(), m, p);
      if (ai->requires_grad) {
        MutMap(ai->grad.data(), m, n).noalias() += f * (go * ConstMap(bi->data.data(), n, p).transpose());
      }
      if (bi->requires_grad) {
        MutMap(bi->grad.data(), n, p).noalias() += f * (ConstMap(ai->data.data(), m, n).transpose() * go);
      }
    });
  }
  return out;
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "bmm");
  require_rank(b, 3, "bmm");
  const std::size_t batch = a.dim(0), m = a.dim(1), n = a.dim(2), p = b.dim(2);
  if (b.dim(0) != batch || b.dim(1) != n) {
    throw DimensionError("bmm: incompatible shapes " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  std::vector<double> c(batch * m * p);
  for (std::size_t i = 0; i < batch; ++i) {
    MutMap(c.data() + i * m * p, m, p).noalias() =
        ConstMap(a.data().data() + i * m * n, m, n) * ConstMap(b.data().data() + i * n * p, n, p);
  }
  Tensor out = result({batch, m, p}, std::move(c), tracked({&a, &b}));
  if (out.requires_grad()) {
    attach(out, [ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr(), batch, m, n, p,
                 f = fault_factor("bmm")] {
      for (std::size_t i = 0; i < batch; ++i) {
        ConstMap go(oi->grad.data() + i * m * p, m, p);
        if (ai->requires_grad) {
          MutMap(ai->grad.data() + i * m * n, m, n).noalias() +=
              f * (go * ConstMap(bi->data.data() + i * n * p, n, p).transpose());
        }
        if (bi->requires_grad) {
          MutMap(bi->grad.data() + i * n * p, n, p).noalias() +=
              f * (ConstMap(ai->data.data() + i * m * n, m, n).transpose() * go);
        }
      }
    });
  }
  return out;
}

Tensor matmul_batched_rhs(const Tensor& a, const Tensor& w) {
  require_rank(a, 3, "matmul_batched_rhs");
  require_rank(w, 2, "matmul_batched_rhs");
  const std::size_t batch = a.dim(0), m = a.dim(1), n = a.dim(2), p = w.dim(1);
  if (w.dim(0) != n) {
    throw DimensionError("matmul_batched_rhs: inner extents differ, " + to_string(a.shape()) +
                         " x " + to_string(w.shape()));
  }
  const std::size_t rows = batch * m;
  std::vector<double> c(rows * p);
  MutMap(c.data(), rows, p).noalias() = ConstMap(a.data().data(), rows, n) * ConstMap(w.data().data(), n, p);
  Tensor out = result({batch, m, p}, std::move(c), tracked({&a, &w}));
  if (out.requires_grad()) {
    attach(out, [ai = a.impl_ptr(), wi = w.impl_ptr(), oi = out.impl_ptr(), rows, n, p,
                 f = fault_factor("matmul")] {
      ConstMap go(oi->grad.data(), rows, p);
      if (ai->requires_grad) {
        MutMap(ai->grad.data(), rows, n).noalias() += f * (go * ConstMap(wi->data.data(), n, p).transpose());
      }
      if (wi->requires_grad) {
        MutMap(wi->grad.data(), n, p).noalias() += f * (ConstMap(ai->data.data(), rows, n).transpose() * go);
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& t) {
  if (t.rank() != 2 && t.rank() != 3) {
    throw DimensionError("transpose: expected rank 2 or 3, got " + to_string(t.shape()));
  }
  const std::size_t batch = t.rank() == 3 ? t.dim(0) : 1;
  const std::size_t m = t.dim(t.rank() - 2), n = t.dim(t.rank() - 1);
  std::vector<double> y(t.numel());
  for (std::size_t i = 0; i < batch; ++i) {
    MutMap(y.data() + i * m * n, n, m) = ConstMap(t.data().data() + i * m * n, m, n).transpose();
  }
  Shape shape = t.shape();
  std::swap(shape[shape.size() - 1], shape[shape.size() - 2]);
  Tensor out = result(std::move(shape), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), batch, m, n] {
      for (std::size_t i = 0; i < batch; ++i) {
        MutMap(ti->grad.data() + i * m * n, m, n) += ConstMap(oi->grad.data() + i * m * n, n, m).transpose();
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& t, Shape shape) {
  if (numel(shape) != t.numel()) {
    throw DimensionError("reshape: cannot view " + to_string(t.shape()) + " as " + to_string(shape));
  }
  for (auto e : shape) {
    if (e == 0) throw DimensionError("reshape: zero extent in " + to_string(shape));
  }
  std::vector<double> y(t.data().begin(), t.data().end());
  Tensor out = result(std::move(shape), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr()] {
      for (std::size_t i = 0; i < oi->grad.size(); ++i) ti->grad[i] += oi->grad[i];
    });
  }
  return out;
}

Tensor tile_batch(const Tensor& t, std::size_t batch) {
  if (batch == 0) throw DimensionError("tile_batch: batch must be positive");
  const std::size_t n = t.numel();
  std::vector<double> y(batch * n);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(t.data().begin(), t.data().end(), y.begin() + b * n);
  }
  Shape shape{batch};
  shape.insert(shape.end(), t.shape().begin(), t.shape().end());
  Tensor out = result(std::move(shape), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), batch, n] {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < n; ++i) ti->grad[i] += oi->grad[b * n + i];
      }
    });
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& tensors, std::size_t axis) {
  if (tensors.empty()) throw ContractError("concat: no tensors");
  const Shape& first = tensors.front().shape();
  require_axis(tensors.front(), axis, "concat");
  Shape shape = first;
  shape[axis] = 0;
  std::vector<const Tensor*> ptrs;
  for (const auto& t : tensors) {
    if (t.rank() != first.size()) {
      throw DimensionError("concat: rank mismatch " + to_string(first) + " vs " + to_string(t.shape()));
    }
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (i != axis && t.dim(i) != first[i]) {
        throw DimensionError("concat: incompatible shapes " + to_string(first) + " and " +
                             to_string(t.shape()) + " along axis " + std::to_string(axis));
      }
    }
    shape[axis] += t.dim(axis);
    ptrs.push_back(&t);
  }
  const auto outer_split = split_at(shape, axis);
  std::vector<double> y(numel(shape));
  std::size_t offset = 0;  // in units of `inner`
  std::vector<std::size_t> offsets;
  for (const auto& t : tensors) {
    offsets.push_back(offset);
    const std::size_t block = t.dim(axis) * outer_split.inner;
    for (std::size_t o = 0; o < outer_split.outer; ++o) {
      std::copy_n(t.data().begin() + o * block, block,
                  y.begin() + o * outer_split.extent * outer_split.inner + offset * outer_split.inner);
    }
    offset += t.dim(axis);
  }
  bool needs = false;
  if (grad_enabled()) {
    for (const auto* p : ptrs) needs = needs || p->requires_grad();
  }
  Tensor out = result(shape, std::move(y), needs);
  if (out.requires_grad()) {
    std::vector<ImplPtr> inputs;
    for (const auto& t : tensors) inputs.push_back(t.impl_ptr());
    attach(out, [inputs, offsets, oi = out.impl_ptr(), s = outer_split] {
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto& in = *inputs[k];
        if (!in.requires_grad) continue;
        const std::size_t ext = in.shape.size() == 0 ? 1 : in.data.size() / (s.outer * s.inner);
        const std::size_t block = ext * s.inner;
        for (std::size_t o = 0; o < s.outer; ++o) {
          const double* src = oi->grad.data() + o * s.extent * s.inner + offsets[k] * s.inner;
          double* dst = in.grad.data() + o * block;
          for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
        }
      }
    });
  }
  return out;
}

Tensor slice(const Tensor& t, std::size_t axis, std::size_t begin, std::size_t end) {
  require_axis(t, axis, "slice");
  if (begin >= end || end > t.dim(axis)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for axis " + std::to_string(axis) + " of " + to_string(t.shape()));
  }
  const auto s = split_at(t.shape(), axis);
  const std::size_t ext = end - begin;
  Shape shape = t.shape();
  shape[axis] = ext;
  std::vector<double> y(s.outer * ext * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(t.data().begin() + (o * s.extent + begin) * s.inner, ext * s.inner,
                y.begin() + o * ext * s.inner);
  }
  Tensor out = result(std::move(shape), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), s, begin, ext] {
      for (std::size_t o = 0; o < s.outer; ++o) {
        const double* src = oi->grad.data() + o * ext * s.inner;
        double* dst = ti->grad.data() + (o * s.extent + begin) * s.inner;
        for (std::size_t i = 0; i < ext * s.inner; ++i) dst[i] += src[i];
      }
    });
  }
  return out;
}

std::vector<Tensor> split(const Tensor& t, std::size_t axis, const std::vector<std::size_t>& extents) {
  require_axis(t, axis, "split");
  const std::size_t total = std::accumulate(extents.begin(), extents.end(), std::size_t{0});
  if (total != t.dim(axis)) {
    throw DimensionError("split: extents sum to " + std::to_string(total) + " but axis " +
                         std::to_string(axis) + " of " + to_string(t.shape()) + " has " +
                         std::to_string(t.dim(axis)));
  }
  std::vector<Tensor> parts;
  std::size_t begin = 0;
  for (auto e : extents) {
    parts.push_back(slice(t, axis, begin, begin + e));
    begin += e;
  }
  return parts;
}

Tensor elementwise(const Tensor& a, const Tensor& b, Elementwise kind) {
  require_same_shape(a, b, "elementwise");
  const auto x = a.data();
  const auto z = b.data();
  std::vector<double> y(x.size());
  switch (kind) {
    case Elementwise::kAdd:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + z[i];
      break;
    case Elementwise::kSub:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - z[i];
      break;
    case Elementwise::kMul:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * z[i];
      break;
  }
  Tensor out = result(a.shape(), std::move(y), tracked({&a, &b}));
  if (out.requires_grad()) {
    attach(out, [ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr(), kind] {
      const auto& g = oi->grad;
      // a and b may alias (y = x + x); accumulate each side independently.
      if (ai->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          ai->grad[i] += kind == Elementwise::kMul ? g[i] * bi->data[i] : g[i];
        }
      }
      if (bi->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          switch (kind) {
            case Elementwise::kAdd: bi->grad[i] += g[i]; break;
            case Elementwise::kSub: bi->grad[i] -= g[i]; break;
            case Elementwise::kMul: bi->grad[i] += g[i] * ai->data[i]; break;
          }
        }
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(a, b, Elementwise::kAdd); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(a, b, Elementwise::kSub); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(a, b, Elementwise::kMul); }

Tensor scale(const Tensor& t, double s) {
  std::vector<double> y(t.data().begin(), t.data().end());
  for (auto& v : y) v *= s;
  Tensor out = result(t.shape(), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), s] {
      for (std::size_t i = 0; i < oi->grad.size(); ++i) ti->grad[i] += s * oi->grad[i];
    });
  }
  return out;
}

Tensor add_bias(const Tensor& t, const Tensor& bias) {
  const std::size_t n = t.shape().back();
  if (bias.numel() != n || bias.rank() != 1) {
    throw DimensionError("add_bias: bias " + to_string(bias.shape()) + " does not match last axis of " +
                         to_string(t.shape()));
  }
  const std::size_t rows = t.numel() / n;
  std::vector<double> y(t.data().begin(), t.data().end());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] += bias.data()[j];
  }
  Tensor out = result(t.shape(), std::move(y), tracked({&t, &bias}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), bi = bias.impl_ptr(), oi = out.impl_ptr(), rows, n] {
      const auto& g = oi->grad;
      if (ti->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) ti->grad[i] += g[i];
      }
      if (bi->requires_grad) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < n; ++j) bi->grad[j] += g[r * n + j];
        }
      }
    });
  }
  return out;
}

Tensor tanh(const Tensor& t) {
  return unary(t, "tanh", [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& t) {
  return unary(t, "sigmoid",
               [](double x) {
                 if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& t) {
  if (g_kink_active) {
    const auto x = t.data();
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      word = (word << 1) | (x[i] > 0.0 ? 1u : 0u);
      if (i % 64 == 63) {
        kink_fold(word);
        word = 0;
      }
    }
    kink_fold(word);
  }
  // Subgradient at exactly zero is taken as zero.
  return unary(t, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor softplus(const Tensor& t) {
  return unary(t, "softplus",
               [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
               [](double x, double) {
                 if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               });
}

Tensor softmax(const Tensor& t, std::size_t axis) {
  require_axis(t, axis, "softmax");
  const auto s = split_at(t.shape(), axis);
  const auto x = t.data();
  std::vector<double> y(x.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      double mx = x[base];
      for (std::size_t e = 1; e < s.extent; ++e) mx = std::max(mx, x[base + e * s.inner]);
      double total = 0.0;
      for (std::size_t e = 0; e < s.extent; ++e) {
        const double v = std::exp(x[base + e * s.inner] - mx);
        y[base + e * s.inner] = v;
        total += v;
      }
      for (std::size_t e = 0; e < s.extent; ++e) y[base + e * s.inner] /= total;
    }
  }
  Tensor out = result(t.shape(), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), s, f = fault_factor("softmax")] {
      const auto& yv = oi->data;
      const auto& g = oi->grad;
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t base = o * s.extent * s.inner + in;
          double dot = 0.0;
          for (std::size_t e = 0; e < s.extent; ++e) dot += g[base + e * s.inner] * yv[base + e * s.inner];
          for (std::size_t e = 0; e < s.extent; ++e) {
            const std::size_t i = base + e * s.inner;
            ti->grad[i] += f * yv[i] * (g[i] - dot);
          }
        }
      }
    });
  }
  return out;
}

Tensor activation(const Tensor& t, Activation kind, std::size_t axis) {
  switch (kind) {
    case Activation::kTanh: return tanh(t);
    case Activation::kRelu: return relu(t);
    case Activation::kSigmoid: return sigmoid(t);
    case Activation::kSoftplus: return softplus(t);
    case Activation::kSoftmax: return softmax(t, axis);
  }
  throw ContractError("activation: unknown kind");
}

Tensor sum(const Tensor& t) {
  double total = 0.0;
  for (double v : t.data()) total += v;
  Tensor out = result({1}, {total}, tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr()] {
      const double g = oi->grad[0];
      for (auto& v : ti->grad) v += g;
    });
  }
  return out;
}

Tensor mean(const Tensor& t) { return scale(sum(t), 1.0 / static_cast<double>(t.numel())); }

Tensor reduce_mean(const Tensor& t, std::size_t axis) {
  require_axis(t, axis, "reduce_mean");
  const auto s = split_at(t.shape(), axis);
  Shape shape = t.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (shape.empty()) shape = {1};
  const auto x = t.data();
  std::vector<double> y(s.outer * s.inner, 0.0);
  const double inv = 1.0 / static_cast<double>(s.extent);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        y[o * s.inner + in] += x[(o * s.extent + e) * s.inner + in];
      }
    }
  }
  for (auto& v : y) v *= inv;
  Tensor out = result(std::move(shape), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), s, inv] {
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t e = 0; e < s.extent; ++e) {
          for (std::size_t in = 0; in < s.inner; ++in) {
            ti->grad[(o * s.extent + e) * s.inner + in] += inv * oi->grad[o * s.inner + in];
          }
        }
      }
    });
  }
  return out;
}

Tensor reduce_max(const Tensor& t, std::size_t axis) {
  require_axis(t, axis, "reduce_max");
  const auto s = split_at(t.shape(), axis);
  Shape shape = t.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (shape.empty()) shape = {1};
  const auto x = t.data();
  std::vector<double> y(s.outer * s.inner);
  std::vector<std::size_t> arg(s.outer * s.inner, 0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      std::size_t best = 0;
      double bv = x[o * s.extent * s.inner + in];
      for (std::size_t e = 1; e < s.extent; ++e) {
        const double v = x[(o * s.extent + e) * s.inner + in];
        if (v > bv) {
          bv = v;
          best = e;
        }
      }
      y[o * s.inner + in] = bv;
      arg[o * s.inner + in] = best;
    }
  }
  if (g_kink_active) {
    for (auto a : arg) kink_fold(a);
  }
  Tensor out = result(std::move(shape), std::move(y), tracked({&t}));
  if (out.requires_grad()) {
    attach(out, [ti = t.impl_ptr(), oi = out.impl_ptr(), s, arg = std::move(arg)] {
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t j = o * s.inner + in;
          ti->grad[(o * s.extent + arg[j]) * s.inner + in] += oi->grad[j];
        }
      }
    });
  }
  return out;
}

namespace kink {
void start() {
  g_kink_active = true;
  g_kink_hash = 1469598103934665603ull;
}
std::uint64_t fingerprint() { return g_kink_hash; }
void stop() { g_kink_active = false; }
}  // namespace kink

void set_gradient_fault(std::optional<std::string_view> op) {
  if (op) {
    g_fault = std::string(*op);
  } else {
    g_fault.reset();
  }
}

}  // namespace ave
