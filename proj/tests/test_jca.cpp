#include <cmath>

#include "ave/errors.hpp"
#include "ave/grad_check.hpp"
#include "ave/jca.hpp"
#include "ave/ops.hpp"
#include "test_util.hpp"

using namespace ave;

namespace {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const Tensor& t) {
  Mat m(t.dim(0), std::vector<double>(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    for (std::size_t j = 0; j < t.dim(1); ++j) m[i][j] = t[i * t.dim(1) + j];
  }
  return m;
}

Mat mm(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

Mat tr(const Mat& a) {
  Mat t(a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

template <class F>
Mat map(Mat a, F f) {
  for (auto& row : a) {
    for (auto& v : row) v = f(v);
  }
  return a;
}

Mat plus(Mat a, const Mat& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) a[i][j] += b[i][j];
  }
  return a;
}

// Straight transcription of one joint co-attention layer with
// concatenation + FC joint representation.
std::pair<Mat, Mat> oracle_layer(const JcaLayerParams& p, const Mat& a, const Mat& v) {
  Mat cat(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    cat[i] = a[i];
    cat[i].insert(cat[i].end(), v[i].begin(), v[i].end());
  }
  Mat j = mm(cat, to_mat(p.fc_weight));
  for (auto& row : j) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += p.fc_bias[c];
  }
  const double root = std::sqrt(static_cast<double>(j[0].size()));
  const Mat c_a = map(mm(mm(tr(a), to_mat(p.w_ja)), j), [&](double x) { return std::tanh(x / root); });
  const Mat c_v = map(mm(mm(tr(v), to_mat(p.w_jv)), j), [&](double x) { return std::tanh(x / root); });
  const auto relu = [](double x) { return x > 0 ? x : 0.0; };
  const Mat h_a = map(plus(mm(to_mat(p.w_a), a), mm(to_mat(p.w_ca), tr(c_a))), relu);
  const Mat h_v = map(plus(mm(to_mat(p.w_v), v), mm(to_mat(p.w_cv), tr(c_v))), relu);
  return {plus(a, mm(tr(to_mat(p.w_ha)), h_a)), plus(v, mm(tr(to_mat(p.w_hv)), h_v))};
}

void check_close(const Tensor& t, const Mat& m, double tol) {
  REQUIRE(t.dim(0) == m.size());
  REQUIRE(t.dim(1) == m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[0].size(); ++j) CHECK(std::abs(t[i * m[0].size() + j] - m[i][j]) <= tol);
  }
}

const FusionStrategy kConcatFc{FusionCombine::kConcatenation, true};

}  // namespace

TEST_CASE("joint representation") {
  Rng rng(61);
  const Tensor a = uniform_tensor({10, 512}, 1.0, rng, false);
  const Tensor v = uniform_tensor({10, 512}, 1.0, rng, false);
  CHECK(joint_representation({FusionCombine::kConcatenation, false}, a, v).shape() == Shape{10, 1024});
  CHECK(testutil::bitwise_equal(
      joint_representation({FusionCombine::kAddition, false}, a, Tensor::zeros({10, 512})), a));
  CHECK(testutil::bitwise_equal(
      joint_representation({FusionCombine::kMultiplication, false}, a, Tensor::full({10, 512}, 1.0)), a));
  CHECK_THROWS_AS(joint_representation({FusionCombine::kAddition, false}, a, Tensor::zeros({10, 256})),
                  DimensionError);
  CHECK_THROWS_AS(joint_representation(kConcatFc, a, v), ContractError);
  CHECK(FusionStrategy::parse("multiplication_fc").name() == "multiplication_fc");
}

TEST_CASE("affinity") {
  Rng rng(62);
  const Tensor a = uniform_tensor({4, 3}, 1.0, rng, false);
  const Tensor j = uniform_tensor({4, 5}, 1.0, rng, false);
  const Tensor c = affinity(a, Tensor::zeros({4, 4}), j, 5.0);
  CHECK(c.shape() == Shape{3, 5});
  for (double x : c.data()) CHECK(x == 0.0);

  const Tensor scalar = affinity(Tensor::from({1, 1}, {2}), Tensor::from({1, 1}, {1}), Tensor::from({1, 1}, {3}), 1.0);
  CHECK(scalar[0] == doctest::Approx(0.99998771).epsilon(1e-8));
  CHECK(scalar[0] == std::tanh(6.0));

  const Tensor big = affinity(uniform_tensor({10, 512}, 1.0, rng, false), uniform_tensor({10, 10}, 1.0, rng, false),
                              uniform_tensor({10, 1024}, 1.0, rng, false), 1024.0);
  CHECK(big.shape() == Shape{512, 1024});
  CHECK_THROWS_AS(affinity(a, Tensor::zeros({3, 3}), j, 5.0), DimensionError);
}

TEST_CASE("attention maps") {
  const JcaDims dims{4, 3, 6, 6};
  const auto zero = JcaLayerParams::zeros(dims, kConcatFc, CoattentionMode::kJoint);
  Rng rng(63);
  const Tensor a = uniform_tensor({4, 6}, 1.0, rng, false);
  const Tensor v = uniform_tensor({4, 6}, 1.0, rng, false);
  const Tensor c = uniform_tensor({6, 12}, 1.0, rng, false);
  const auto [h_a, h_v] = attention_maps(zero, a, v, c, c);
  CHECK(h_a.shape() == Shape{3, 6});
  for (double x : h_a.data()) CHECK(x == 0.0);
  for (double x : h_v.data()) CHECK(x == 0.0);

  const Tensor h = attention_map(Tensor::from({1, 1}, {1}), Tensor::from({1, 1}, {2}), Tensor::from({1, 1}, {1}),
                                 Tensor::from({1, 1}, {-3}));
  CHECK(h[0] == 0.0);

  const JcaDims full{10, 10, 512, 512};
  const auto p = JcaLayerParams::init(full, kConcatFc, CoattentionMode::kJoint, rng);
  const Tensor pa = uniform_tensor({10, 512}, 1.0, rng, false);
  const auto trace = jca_layer_trace(p, kConcatFc, CoattentionMode::kJoint, pa, pa);
  CHECK(trace.h_a.shape() == Shape{10, 512});
  CHECK(trace.c_a.shape() == Shape{512, 1024});
}

TEST_CASE("zero W_ha and W_hv make the layer an identity") {
  Rng rng(64);
  const JcaDims dims{4, 3, 6, 6};
  for (auto mode : {CoattentionMode::kJoint, CoattentionMode::kOriginal}) {
    auto p = JcaLayerParams::init(dims, kConcatFc, mode, rng);
    p.w_ha = Tensor::zeros(p.w_ha.shape());
    p.w_hv = Tensor::zeros(p.w_hv.shape());
    const Tensor a = uniform_tensor({4, 6}, 1.0, rng, false);
    const Tensor v = uniform_tensor({4, 6}, 1.0, rng, false);
    const auto [ao, vo] = jca_layer(p, kConcatFc, mode, a, v);
    CHECK(testutil::bitwise_equal(ao, a));
    CHECK(testutil::bitwise_equal(vo, v));
  }
}

TEST_CASE("layer matches the plain-loop oracle") {
  Rng rng(65);
  const JcaDims dims{5, 3, 4, 6};
  const auto p = JcaLayerParams::init(dims, kConcatFc, CoattentionMode::kJoint, rng);
  const Tensor a = uniform_tensor({5, 4}, 1.0, rng, false);
  const Tensor v = uniform_tensor({5, 6}, 1.0, rng, false);
  const auto [ao, vo] = jca_layer(p, kConcatFc, CoattentionMode::kJoint, a, v);
  CHECK(ao.shape() == a.shape());
  CHECK(vo.shape() == v.shape());
  const auto [ea, ev] = oracle_layer(p, to_mat(a), to_mat(v));
  check_close(ao, ea, 1e-13);
  check_close(vo, ev, 1e-13);
}

TEST_CASE("batched layer agrees with per-sequence calls") {
  Rng rng(66);
  const JcaDims dims{4, 3, 6, 6};
  const auto p = JcaLayerParams::init(dims, kConcatFc, CoattentionMode::kJoint, rng);
  const Tensor a = uniform_tensor({2, 4, 6}, 1.0, rng, false);
  const Tensor v = uniform_tensor({2, 4, 6}, 1.0, rng, false);
  const auto [ao, vo] = jca_layer(p, kConcatFc, CoattentionMode::kJoint, a, v);
  for (std::size_t b = 0; b < 2; ++b) {
    const auto [sa, sv] = jca_layer(p, kConcatFc, CoattentionMode::kJoint, reshape(slice(a, 0, b, b + 1), {4, 6}),
                                    reshape(slice(v, 0, b, b + 1), {4, 6}));
    CHECK(testutil::max_abs_diff(sa, reshape(slice(ao, 0, b, b + 1), {4, 6})) < 1e-14);
    CHECK(testutil::max_abs_diff(sv, reshape(slice(vo, 0, b, b + 1), {4, 6})) < 1e-14);
  }
}

TEST_CASE("layer gradient passes grad_check for every strategy and mode") {
  const JcaDims dims{4, 3, 6, 6};
  for (auto combine : {FusionCombine::kAddition, FusionCombine::kMultiplication, FusionCombine::kConcatenation}) {
    for (bool fc : {false, true}) {
      for (auto mode : {CoattentionMode::kJoint, CoattentionMode::kOriginal}) {
        const FusionStrategy strategy{combine, fc};
        CAPTURE(strategy.name());
        Rng rng(67);
        auto p = JcaLayerParams::init(dims, strategy, mode, rng);
        Tensor a = uniform_tensor({4, 6}, 1.0, rng);
        Tensor v = uniform_tensor({4, 6}, 1.0, rng);
        const Tensor wa = uniform_tensor({4, 6}, 1.0, rng, false);
        const Tensor wv = uniform_tensor({4, 6}, 1.0, rng, false);
        std::vector<Tensor> inputs{a, v};
        std::vector<std::string> names{"A", "V"};
        for (const auto& np : p.parameters("")) {
          inputs.push_back(np.tensor);
          names.push_back(np.name);
        }
        const auto report = grad_check(
            [&] {
              const auto [ao, vo] = jca_layer(p, strategy, mode, a, v);
              return add(sum(mul(ao, wa)), sum(mul(vo, wv)));
            },
            inputs, names);
        CHECK(report.passed);
      }
    }
  }
}

TEST_CASE("stack composition and depth zero") {
  Rng rng(68);
  const JcaDims dims{4, 3, 6, 6};
  const auto empty = JcaStack::init(dims, kConcatFc, CoattentionMode::kJoint, 0, rng);
  const Tensor a = uniform_tensor({4, 6}, 1.0, rng, false);
  const Tensor v = uniform_tensor({4, 6}, 1.0, rng, false);
  const auto [a0, v0] = jca_stack_forward(empty, a, v);
  CHECK(testutil::bitwise_equal(a0, a));
  CHECK(testutil::bitwise_equal(v0, v));
  CHECK(empty.parameters("").empty());

  const auto stack = JcaStack::init(dims, kConcatFc, CoattentionMode::kJoint, 2, rng);
  const auto [a2, v2] = jca_stack_forward(stack, a, v);
  const auto [a1, v1] = jca_layer(stack.layers[0], kConcatFc, CoattentionMode::kJoint, a, v);
  const auto [ea, ev] = jca_layer(stack.layers[1], kConcatFc, CoattentionMode::kJoint, a1, v1);
  CHECK(testutil::bitwise_equal(a2, ea));
  CHECK(testutil::bitwise_equal(v2, ev));
}

TEST_CASE("zeroed W_h across a stack is an identity") {
  for (std::size_t depth : {1, 2, 3}) {
    Rng rng(69);
    auto stack = JcaStack::init({4, 3, 6, 6}, kConcatFc, CoattentionMode::kJoint, depth, rng);
    for (auto& layer : stack.layers) {
      layer.w_ha = Tensor::zeros(layer.w_ha.shape());
      layer.w_hv = Tensor::zeros(layer.w_hv.shape());
    }
    const Tensor a = uniform_tensor({4, 6}, 1.0, rng, false);
    const Tensor v = uniform_tensor({4, 6}, 1.0, rng, false);
    const auto [ao, vo] = jca_stack_forward(stack, a, v);
    CHECK(testutil::bitwise_equal(ao, a));
    CHECK(testutil::bitwise_equal(vo, v));
  }
}

TEST_CASE("three-layer stack gradient passes grad_check") {
  Rng rng(70);
  auto stack = JcaStack::init({4, 3, 6, 6}, kConcatFc, CoattentionMode::kJoint, 3, rng);
  Tensor a = uniform_tensor({4, 6}, 1.0, rng);
  Tensor v = uniform_tensor({4, 6}, 1.0, rng);
  const Tensor w = uniform_tensor({4, 6}, 1.0, rng, false);
  std::vector<Tensor> inputs{a, v};
  for (const auto& np : stack.parameters("")) inputs.push_back(np.tensor);
  const auto report = grad_check(
      [&] {
        const auto [ao, vo] = jca_stack_forward(stack, a, v);
        return add(sum(mul(ao, w)), sum(mul(tanh(vo), w)));
      },
      inputs);
  CHECK(report.passed);
}

TEST_CASE("per-layer parameter count") {
  const std::size_t n = 10, k = 7, da = 12, dv = 20;
  const JcaDims dims{n, k, da, dv};
  const std::size_t d = da + dv;
  CHECK(jca_layer_parameter_count(dims, {FusionCombine::kConcatenation, false}, CoattentionMode::kJoint) ==
        2 * n * n + 2 * k * n + 2 * k * d + 2 * k * n);
  CHECK(jca_layer_parameter_count(dims, kConcatFc, CoattentionMode::kJoint) ==
        2 * n * n + 2 * k * n + 2 * k * d + 2 * k * n + d * d + d);
  CHECK(jca_layer_parameter_count(dims, kConcatFc, CoattentionMode::kOriginal) ==
        2 * n * n + 2 * k * n + k * dv + k * da + 2 * k * n);
  Rng rng(71);
  for (auto mode : {CoattentionMode::kJoint, CoattentionMode::kOriginal}) {
    const auto p = JcaLayerParams::init(dims, kConcatFc, mode, rng);
    CHECK(total_size(p.parameters("")) == jca_layer_parameter_count(dims, kConcatFc, mode));
  }
}
