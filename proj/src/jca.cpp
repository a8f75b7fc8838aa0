#include "ave/jca.hpp"

#include <cmath>
#include <tuple>

#include "ave/errors.hpp"
#include "ave/ops.hpp"

namespace ave {
namespace {

double inv_sqrt(std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

// Lifts [N x d] to [1 x N x d]; batches pass through.
Tensor as_batch(const Tensor& t, const char* what) {
  if (t.rank() == 3) return t;
  if (t.rank() == 2) return reshape(t, {1, t.dim(0), t.dim(1)});
  throw DimensionError(std::string(what) + ": expected [N x d] or [B x N x d], got " + to_string(t.shape()));
}

Tensor restore_rank(const Tensor& t, bool batched) {
  return batched ? t : reshape(t, {t.dim(1), t.dim(2)});
}

// Left-multiplies every batch item by the shared matrix w.
Tensor shared_lhs(const Tensor& w, const Tensor& x) { return bmm(tile_batch(w, x.dim(0)), x); }

void require_weight(const Tensor& w, std::size_t rows, std::size_t cols, const char* name) {
  if (w.shape() != Shape{rows, cols}) {
    throw DimensionError(std::string(name) + " is " + to_string(w.shape()) + ", expected " +
                         to_string(Shape{rows, cols}));
  }
}

// Widths of the attention source for each modality: (source of C_a, source of C_v).
std::pair<std::size_t, std::size_t> source_widths(const JcaDims& dims, const FusionStrategy& strategy,
                                                  CoattentionMode mode) {
  if (mode == CoattentionMode::kOriginal) return {dims.d_v, dims.d_a};
  const std::size_t d = joint_width(strategy, dims.d_a, dims.d_v);
  return {d, d};
}

std::size_t combined_width(const FusionStrategy& strategy, std::size_t d_a, std::size_t d_v) {
  return strategy.combine == FusionCombine::kConcatenation ? d_a + d_v : d_a;
}

}  // namespace

std::string FusionStrategy::name() const {
  std::string base;
  switch (combine) {
    case FusionCombine::kAddition: base = "addition"; break;
    case FusionCombine::kMultiplication: base = "multiplication"; break;
    case FusionCombine::kConcatenation: base = "concatenation"; break;
  }
  return fc ? base + "_fc" : base;
}

FusionStrategy FusionStrategy::parse(const std::string& name) {
  FusionStrategy s;
  std::string base = name;
  s.fc = false;
  if (base.size() > 3 && base.compare(base.size() - 3, 3, "_fc") == 0) {
    s.fc = true;
    base.resize(base.size() - 3);
  }
  if (base == "addition") {
    s.combine = FusionCombine::kAddition;
  } else if (base == "multiplication") {
    s.combine = FusionCombine::kMultiplication;
  } else if (base == "concatenation") {
    s.combine = FusionCombine::kConcatenation;
  } else {
    throw ConfigError("unknown fusion strategy '" + name + "'");
  }
  return s;
}

std::size_t joint_width(const FusionStrategy& strategy, std::size_t d_a, std::size_t d_v) {
  if (strategy.combine != FusionCombine::kConcatenation && d_a != d_v) {
    throw DimensionError(strategy.name() + " fusion needs d_a == d_v, got " + std::to_string(d_a) +
                         " and " + std::to_string(d_v));
  }
  return combined_width(strategy, d_a, d_v);
}

JcaLayerParams JcaLayerParams::init(const JcaDims& dims, const FusionStrategy& strategy, CoattentionMode mode,
                                    Rng& rng) {
  const auto [src_a, src_v] = source_widths(dims, strategy, mode);
  const std::size_t n = dims.segments, k = dims.k;
  JcaLayerParams p;
  p.w_ja = uniform_tensor({n, n}, inv_sqrt(n), rng);
  p.w_jv = uniform_tensor({n, n}, inv_sqrt(n), rng);
  p.w_a = uniform_tensor({k, n}, inv_sqrt(n), rng);
  p.w_v = uniform_tensor({k, n}, inv_sqrt(n), rng);
  p.w_ca = uniform_tensor({k, src_a}, inv_sqrt(src_a), rng);
  p.w_cv = uniform_tensor({k, src_v}, inv_sqrt(src_v), rng);
  p.w_ha = uniform_tensor({k, n}, inv_sqrt(k), rng);
  p.w_hv = uniform_tensor({k, n}, inv_sqrt(k), rng);
  if (mode == CoattentionMode::kJoint && strategy.fc) {
    const std::size_t in = combined_width(strategy, dims.d_a, dims.d_v);
    const std::size_t d = joint_width(strategy, dims.d_a, dims.d_v);
    p.fc_weight = uniform_tensor({in, d}, inv_sqrt(in), rng);
    p.fc_bias = uniform_tensor({d}, inv_sqrt(in), rng);
  }
  return p;
}

JcaLayerParams JcaLayerParams::zeros(const JcaDims& dims, const FusionStrategy& strategy, CoattentionMode mode) {
  const auto [src_a, src_v] = source_widths(dims, strategy, mode);
  const std::size_t n = dims.segments, k = dims.k;
  JcaLayerParams p;
  p.w_ja = Tensor::zeros({n, n}, true);
  p.w_jv = Tensor::zeros({n, n}, true);
  p.w_a = Tensor::zeros({k, n}, true);
  p.w_v = Tensor::zeros({k, n}, true);
  p.w_ca = Tensor::zeros({k, src_a}, true);
  p.w_cv = Tensor::zeros({k, src_v}, true);
  p.w_ha = Tensor::zeros({k, n}, true);
  p.w_hv = Tensor::zeros({k, n}, true);
  if (mode == CoattentionMode::kJoint && strategy.fc) {
    const std::size_t in = combined_width(strategy, dims.d_a, dims.d_v);
    const std::size_t d = joint_width(strategy, dims.d_a, dims.d_v);
    p.fc_weight = Tensor::zeros({in, d}, true);
    p.fc_bias = Tensor::zeros({d}, true);
  }
  return p;
}

ParameterList JcaLayerParams::parameters(const std::string& prefix) const {
  ParameterList out{{prefix + "w_ja", w_ja}, {prefix + "w_jv", w_jv}, {prefix + "w_a", w_a},
                    {prefix + "w_v", w_v},   {prefix + "w_ca", w_ca}, {prefix + "w_cv", w_cv},
                    {prefix + "w_ha", w_ha}, {prefix + "w_hv", w_hv}};
  if (fc_weight.defined()) {
    out.push_back({prefix + "fc_weight", fc_weight});
    out.push_back({prefix + "fc_bias", fc_bias});
  }
  return out;
}

std::size_t jca_layer_parameter_count(const JcaDims& dims, const FusionStrategy& strategy, CoattentionMode mode) {
  const auto [src_a, src_v] = source_widths(dims, strategy, mode);
  const std::size_t n = dims.segments, k = dims.k;
  std::size_t count = 2 * n * n + 2 * k * n + k * src_a + k * src_v + 2 * k * n;
  if (mode == CoattentionMode::kJoint && strategy.fc) {
    const std::size_t in = combined_width(strategy, dims.d_a, dims.d_v);
    const std::size_t d = joint_width(strategy, dims.d_a, dims.d_v);
    count += in * d + d;
  }
  return count;
}

Tensor joint_representation(const FusionStrategy& strategy, const Tensor& a, const Tensor& v,
                            const Tensor& fc_weight, const Tensor& fc_bias) {
  if (a.rank() != v.rank() || a.dim(0) != v.dim(0) || (a.rank() == 3 && a.dim(1) != v.dim(1))) {
    throw DimensionError("joint_representation: audio " + to_string(a.shape()) + " and visual " +
                         to_string(v.shape()) + " disagree on segments");
  }
  const std::size_t axis = a.rank() - 1;
  joint_width(strategy, a.dim(axis), v.dim(axis));
  Tensor j;
  switch (strategy.combine) {
    case FusionCombine::kAddition: j = add(a, v); break;
    case FusionCombine::kMultiplication: j = mul(a, v); break;
    case FusionCombine::kConcatenation: j = concat({a, v}, axis); break;
  }
  if (!strategy.fc) return j;
  if (!fc_weight.defined() || !fc_bias.defined()) {
    throw ContractError("joint_representation: " + strategy.name() + " needs fc parameters");
  }
  const bool batched = j.rank() == 3;
  Tensor projected = add_bias(matmul_batched_rhs(as_batch(j, "joint_representation"), fc_weight), fc_bias);
  return restore_rank(projected, batched);
}

Tensor affinity(const Tensor& x, const Tensor& w, const Tensor& j, double d) {
  const bool batched = x.rank() == 3;
  Tensor xb = as_batch(x, "affinity");
  Tensor jb = as_batch(j, "affinity");
  const std::size_t n = xb.dim(1);
  if (jb.dim(0) != xb.dim(0) || jb.dim(1) != n) {
    throw DimensionError("affinity: modality " + to_string(x.shape()) + " and joint " + to_string(j.shape()) +
                         " disagree on segments");
  }
  require_weight(w, n, n, "affinity weight");
  Tensor c = tanh(scale(bmm(transpose(xb), shared_lhs(w, jb)), 1.0 / std::sqrt(d)));
  return restore_rank(c, batched);
}

Tensor attention_map(const Tensor& w_m, const Tensor& x, const Tensor& w_c, const Tensor& c) {
  const bool batched = x.rank() == 3;
  Tensor xb = as_batch(x, "attention_map");
  Tensor cb = as_batch(c, "attention_map");
  const std::size_t n = xb.dim(1), width = xb.dim(2);
  if (w_m.rank() != 2 || w_m.dim(1) != n) {
    throw DimensionError("attention_map: modality weight " + to_string(w_m.shape()) + " vs sequence " +
                         to_string(x.shape()));
  }
  const std::size_t k = w_m.dim(0);
  if (cb.dim(0) != xb.dim(0) || cb.dim(1) != width) {
    throw DimensionError("attention_map: affinity " + to_string(c.shape()) + " does not match sequence " +
                         to_string(x.shape()));
  }
  require_weight(w_c, k, cb.dim(2), "affinity weight");
  Tensor h = relu(add(shared_lhs(w_m, xb), shared_lhs(w_c, transpose(cb))));
  return restore_rank(h, batched);
}

std::pair<Tensor, Tensor> attention_maps(const JcaLayerParams& params, const Tensor& a, const Tensor& v,
                                         const Tensor& c_a, const Tensor& c_v) {
  return {attention_map(params.w_a, a, params.w_ca, c_a), attention_map(params.w_v, v, params.w_cv, c_v)};
}

JcaLayerTrace jca_layer_trace(const JcaLayerParams& params, const FusionStrategy& strategy, CoattentionMode mode,
                              const Tensor& a, const Tensor& v) {
  const bool batched = a.rank() == 3;
  if (v.rank() != a.rank()) {
    throw DimensionError("jca_layer: audio " + to_string(a.shape()) + " and visual " + to_string(v.shape()) +
                         " differ in rank");
  }
  JcaLayerTrace t;
  if (mode == CoattentionMode::kJoint) {
    t.joint = joint_representation(strategy, a, v, params.fc_weight, params.fc_bias);
    const double d = static_cast<double>(t.joint.shape().back());
    t.c_a = affinity(a, params.w_ja, t.joint, d);
    t.c_v = affinity(v, params.w_jv, t.joint, d);
  } else {
    t.c_a = affinity(a, params.w_ja, v, static_cast<double>(v.shape().back()));
    t.c_v = affinity(v, params.w_jv, a, static_cast<double>(a.shape().back()));
  }
  std::tie(t.h_a, t.h_v) = attention_maps(params, a, v, t.c_a, t.c_v);

  // g is summation: A' = A + W_ha^T H_a.
  Tensor ab = as_batch(a, "jca_layer");
  Tensor vb = as_batch(v, "jca_layer");
  require_weight(params.w_ha, params.w_a.dim(0), ab.dim(1), "w_ha");
  require_weight(params.w_hv, params.w_v.dim(0), vb.dim(1), "w_hv");
  Tensor a_out = add(ab, shared_lhs(transpose(params.w_ha), as_batch(t.h_a, "jca_layer")));
  Tensor v_out = add(vb, shared_lhs(transpose(params.w_hv), as_batch(t.h_v, "jca_layer")));
  t.a_out = restore_rank(a_out, batched);
  t.v_out = restore_rank(v_out, batched);
  return t;
}

std::pair<Tensor, Tensor> jca_layer(const JcaLayerParams& params, const FusionStrategy& strategy,
                                    CoattentionMode mode, const Tensor& a, const Tensor& v) {
  auto t = jca_layer_trace(params, strategy, mode, a, v);
  return {t.a_out, t.v_out};
}

JcaStack JcaStack::init(const JcaDims& dims, const FusionStrategy& strategy, CoattentionMode mode,
                        std::size_t depth, Rng& rng) {
  JcaStack s{dims, strategy, mode, {}};
  for (std::size_t i = 0; i < depth; ++i) s.layers.push_back(JcaLayerParams::init(dims, strategy, mode, rng));
  return s;
}

ParameterList JcaStack::parameters(const std::string& prefix) const {
  ParameterList out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    append(out, layers[i].parameters(prefix + "layer" + std::to_string(i) + "."));
  }
  return out;
}

std::pair<Tensor, Tensor> jca_stack_forward(const JcaStack& stack, const Tensor& a, const Tensor& v) {
  Tensor a_cur = a, v_cur = v;
  for (const auto& layer : stack.layers) {
    std::tie(a_cur, v_cur) = jca_layer(layer, stack.strategy, stack.mode, a_cur, v_cur);
  }
  return {a_cur, v_cur};
}

}  // namespace ave
