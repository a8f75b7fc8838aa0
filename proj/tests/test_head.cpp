#include <cmath>

#include "ave/errors.hpp"
#include "ave/grad_check.hpp"
#include "ave/head.hpp"
#include "ave/model.hpp"
#include "ave/ops.hpp"
#include "test_util.hpp"

using namespace ave;

namespace {

// Per-entry binary cross-entropy on sigmoid scores, averaged over all entries.
double direct_loss(const Tensor& x, const Tensor& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-x[i]));
    total -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return total / static_cast<double>(x.numel());
}

std::vector<std::uint8_t> random_labels(std::size_t n, std::size_t classes, Rng& rng) {
  std::vector<std::uint8_t> l(n);
  for (auto& v : l) v = static_cast<std::uint8_t>(rng() % classes);
  return l;
}

}  // namespace

TEST_CASE("loss at zero logits is ln 2") {
  Rng rng(81);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng() % 12, classes = 2 + rng() % 30;
    const Tensor y = one_hot(random_labels(rows, classes, rng), classes);
    CHECK(std::abs(mlsm_loss(Tensor::zeros({rows, classes}), y).item() - std::log(2.0)) <= 1e-12);
  }
}

TEST_CASE("loss vanishes for confident correct scores") {
  const Tensor y = one_hot(std::vector<std::uint8_t>{0, 2}, 3);
  std::vector<double> x(6);
  for (std::size_t i = 0; i < 6; ++i) x[i] = y[i] == 1.0 ? 60.0 : -60.0;
  CHECK(mlsm_loss(Tensor::from({2, 3}, x), y).item() < 1e-25);
}

TEST_CASE("loss matches direct summation") {
  Rng rng(82);
  const Tensor x = uniform_tensor({2, 3}, 3.0, rng, false);
  const Tensor y = one_hot(std::vector<std::uint8_t>{1, 0}, 3);
  CHECK(std::abs(mlsm_loss(x, y).item() - direct_loss(x, y)) <= 1e-12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng() % 20, classes = 2 + rng() % 29;
    const Tensor xs = uniform_tensor({rows, classes}, 8.0, rng, false);
    const Tensor ys = one_hot(random_labels(rows, classes, rng), classes);
    CHECK(std::abs(mlsm_loss(xs, ys).item() - direct_loss(xs, ys)) <= 1e-12);
  }
}

TEST_CASE("loss contracts") {
  const Tensor x = Tensor::zeros({2, 3});
  CHECK_THROWS_AS(mlsm_loss(x, Tensor::zeros({2, 4})), DimensionError);
  CHECK_THROWS_AS(mlsm_loss(x, Tensor::zeros({2, 3}), true), ContractError);
  CHECK_NOTHROW(mlsm_loss(x, one_hot(std::vector<std::uint8_t>{0, 1}, 3), true));
  CHECK_THROWS_AS(one_hot(std::vector<std::uint8_t>{3}, 3), ContractError);
}

TEST_CASE("loss gradient passes grad_check") {
  Rng rng(83);
  Tensor x = uniform_tensor({4, 5}, 3.0, rng);
  const Tensor y = one_hot(random_labels(4, 5, rng), 5);
  CHECK(grad_check([&] { return mlsm_loss(x, y); }, {x}).passed);
}

TEST_CASE("segment accuracy") {
  const std::vector<std::uint8_t> labels{0, 2, 1, 1};
  CHECK(segment_accuracy(one_hot(labels, 3), labels) == 1.0);
  CHECK_THROWS_AS(segment_accuracy(Tensor::zeros({1, 3}), std::vector<std::uint8_t>{}), ContractError);

  // 30% background, predictor that always says background.
  std::vector<std::uint8_t> mixed(1000, 3);
  for (std::size_t i = 0; i < 700; ++i) mixed[i] = static_cast<std::uint8_t>(i % 3);
  std::vector<std::uint8_t> all_bg(1000, 3);
  CHECK(segment_accuracy(one_hot(all_bg, 4), mixed) == doctest::Approx(0.30).epsilon(1e-15));
}

TEST_CASE("uniform random predictions score about 1/29") {
  Rng rng(84);
  const std::size_t trials = 100000;
  const Tensor scores = uniform_tensor({trials, 29}, 1.0, rng, false);
  const auto labels = random_labels(trials, 29, rng);
  CHECK(std::abs(segment_accuracy(scores, labels) - 1.0 / 29.0) < 0.005);
}

TEST_CASE("prediction head") {
  Rng rng(85);
  const auto head = PredictionHeadParams::init(12, 5, 16, 8, 29, rng);
  const Tensor a = uniform_tensor({10, 6}, 1.0, rng, false);
  const Tensor v = uniform_tensor({10, 6}, 1.0, rng, false);
  const Tensor p = predict(head, a, v);
  CHECK(p.shape() == Shape{10, 29});
  for (double s : p.data()) CHECK((s > 0.0 && s < 1.0));
  CHECK(head_parameter_count(12, 5, 16, 8, 29) == total_size(head.parameters("")));
  CHECK_THROWS_AS(predict(head, a, uniform_tensor({10, 5}, 1.0, rng, false)), DimensionError);
}

TEST_CASE("argmax is invariant to positive rescaling of logits") {
  Rng rng(86);
  const Tensor x = uniform_tensor({50, 29}, 4.0, rng, false);
  const auto base = argmax_rows(sigmoid(x));
  for (double s : {0.01, 0.5, 3.0}) CHECK(argmax_rows(sigmoid(scale(x, s))) == base);
  // Far out, sigmoid rounds to 1 in double precision; the logits keep the order.
  CHECK(argmax_rows(scale(x, 100.0)) == base);
}

TEST_CASE("head gradient passes grad_check") {
  Rng rng(87);
  auto head = PredictionHeadParams::init(4, 3, 5, 4, 3, rng);
  Tensor a = uniform_tensor({3, 2}, 1.0, rng);
  Tensor v = uniform_tensor({3, 2}, 1.0, rng);
  const Tensor y = one_hot(random_labels(3, 3, rng), 3);
  std::vector<Tensor> inputs{a, v};
  for (const auto& np : head.parameters("")) inputs.push_back(np.tensor);
  CHECK(grad_check([&] { return mlsm_loss(head_logits(head, a, v), y); }, inputs).passed);
}

TEST_CASE("full model at default dimensions") {
  ModelConfig cfg;
  cfg.depth = 1;
  const Model model(cfg, 1);
  Rng rng(88);
  const Tensor audio = uniform_tensor({1, 10, 128}, 1.0, rng, false);
  const Tensor visual = uniform_tensor({1, 10, 49, 512}, 1.0, rng, false);
  NoGradGuard guard;
  const auto out = model.forward({audio, visual});
  CHECK(out.logits.shape() == Shape{1, 10, 29});
  CHECK(out.visual_weights.shape() == Shape{1, 10, 49});
  CHECK(total_size(model.parameters()) == count_parameters(cfg).total());
}

TEST_CASE("parameter accounting") {
  ModelConfig cfg;
  cfg.d_a = cfg.d_v = 64;
  cfg.segments = cfg.k = 10;
  SUBCASE("constant per-layer increment") {
    std::vector<std::size_t> totals;
    for (std::size_t ell = 1; ell <= 5; ++ell) {
      cfg.depth = ell;
      totals.push_back(count_parameters(cfg).total());
    }
    for (std::size_t i = 2; i < totals.size(); ++i) CHECK(totals[i] - totals[i - 1] == totals[1] - totals[0]);
  }
  SUBCASE("increment without FC is the block-size sum") {
    cfg.fusion = {FusionCombine::kConcatenation, false};
    const std::size_t n = 10, k = 10, d = 128;
    cfg.depth = 2;
    const auto two = count_parameters(cfg).total();
    cfg.depth = 3;
    CHECK(count_parameters(cfg).total() - two == 2 * n * n + 2 * k * n + 2 * k * d + 2 * k * n);
  }
  SUBCASE("depth zero contributes nothing") {
    cfg.depth = 0;
    CHECK(count_parameters(cfg).module("jca") == 0);
  }
  SUBCASE("counts agree with instantiated models for every variant") {
    cfg.depth = 2;
    for (auto early : {EarlyFusionKind::kAudioGuided, EarlyFusionKind::kAverage}) {
      for (auto residual : {ResidualMode::kOff, ResidualMode::kInput, ResidualMode::kOutput}) {
        for (auto mode : {CoattentionMode::kJoint, CoattentionMode::kOriginal}) {
          cfg.early_fusion = early;
          cfg.residual = residual;
          cfg.coattention = mode;
          CHECK(total_size(Model(cfg, 3).parameters()) == count_parameters(cfg).total());
        }
      }
    }
  }
}

TEST_CASE("fusion strategy ordering at default dimensions") {
  ModelConfig cfg;  // N = k = 10, d_a = d_v = 512
  auto count = [&](FusionCombine c, bool fc) {
    cfg.fusion = {c, fc};
    return count_parameters(cfg).total();
  };
  const auto add = count(FusionCombine::kAddition, false);
  const auto mul = count(FusionCombine::kMultiplication, false);
  const auto cat = count(FusionCombine::kConcatenation, false);
  const auto add_fc = count(FusionCombine::kAddition, true);
  const auto mul_fc = count(FusionCombine::kMultiplication, true);
  const auto cat_fc = count(FusionCombine::kConcatenation, true);
  CHECK(add == mul);
  CHECK(mul < cat);
  CHECK(cat < add_fc);
  CHECK(add_fc == mul_fc);
  CHECK(mul_fc < cat_fc);
}

TEST_CASE("model config validation") {
  ModelConfig cfg;
  cfg.d_a = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.d_a = 512;
  cfg.d_v = 256;
  cfg.fusion = {FusionCombine::kAddition, false};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.fusion = {FusionCombine::kConcatenation, true};
  CHECK_NOTHROW(cfg.validate());
}
