#include <cmath>

#include "ave/early_fusion.hpp"
#include "ave/errors.hpp"
#include "ave/grad_check.hpp"
#include "ave/ops.hpp"
#include "test_util.hpp"

using namespace ave;

TEST_CASE("zero projection gives uniform weights and the spatial mean") {
  Rng rng(51);
  EarlyFusionParams p{Tensor::zeros({8, 5}, true)};
  const Tensor audio = uniform_tensor({5}, 1.0, rng, false);
  const Tensor grid = uniform_tensor({49, 8}, 1.0, rng, false);
  const auto out = audio_guided_pool(p, audio, grid);
  CHECK(out.weights.shape() == Shape{49});
  for (double w : out.weights.data()) CHECK(w == doctest::Approx(1.0 / 49).epsilon(1e-14));
  const Tensor avg = baseline_pool(grid, EarlyFusionKind::kAverage);
  CHECK(testutil::max_abs_diff(out.pooled, avg) < 1e-14);
}

TEST_CASE("weights are positive and sum to one") {
  Rng rng(52);
  const auto p = EarlyFusionParams::init(6, 7, rng);
  const Tensor audio = uniform_tensor({3, 6}, 3.0, rng, false);
  const Tensor grid = uniform_tensor({3, 49, 7}, 3.0, rng, false);
  const auto out = audio_guided_pool(p, audio, grid);
  CHECK(out.weights.shape() == Shape{3, 49});
  CHECK(out.pooled.shape() == Shape{3, 7});
  for (std::size_t s = 0; s < 3; ++s) {
    double total = 0;
    for (std::size_t i = 0; i < 49; ++i) {
      CHECK(out.weights[s * 49 + i] > 0.0);
      total += out.weights[s * 49 + i];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("position aligned with the audio query dominates") {
  Rng rng(53);
  const std::size_t da = 6, c = 16, positions = 49, hot = 17;
  const auto p = EarlyFusionParams::init(da, c, rng);
  const Tensor audio = uniform_tensor({da}, 1.0, rng, false);
  Tensor grid = uniform_tensor({positions, c}, 0.1, rng, false);

  std::vector<double> q(c, 0.0);
  double qq = 0;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < da; ++j) q[i] += p.audio_proj[i * da + j] * audio[j];
    qq += q[i] * q[i];
  }
  const double lambda = 100.0 / std::sqrt(qq);
  for (std::size_t i = 0; i < c; ++i) grid.mutable_data()[hot * c + i] = lambda * q[i];

  // Softmax by hand over the constructed scores.
  std::vector<double> scores(positions);
  for (std::size_t pos = 0; pos < positions; ++pos) {
    double s = 0;
    for (std::size_t i = 0; i < c; ++i) s += grid[pos * c + i] * q[i];
    scores[pos] = s / std::sqrt(static_cast<double>(c));
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0;
  for (double s : scores) z += std::exp(s - top);
  const double expected = std::exp(scores[hot] - top) / z;

  const auto out = audio_guided_pool(p, audio, grid);
  CHECK(expected > 0.99);
  CHECK(out.weights[hot] > 0.99);
  CHECK(out.weights[hot] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("baseline pools") {
  const Tensor constant = Tensor::full({49, 4}, 2.5);
  for (auto kind : {EarlyFusionKind::kAverage, EarlyFusionKind::kMax}) {
    const Tensor pooled = baseline_pool(constant, kind);
    for (double v : pooled.data()) CHECK(v == 2.5);
  }
  std::vector<double> rows;
  for (int r = 0; r < 6; ++r) {
    for (int ch = 0; ch < 3; ++ch) rows.push_back(r % 2 == 0 ? 0.0 : 2.0);
  }
  const Tensor avg = baseline_pool(Tensor::from({6, 3}, rows), EarlyFusionKind::kAverage);
  for (double v : avg.data()) CHECK(v == 1.0);
  CHECK_THROWS_AS(baseline_pool(constant, EarlyFusionKind::kAudioGuided), ContractError);
}

TEST_CASE("max pooling dominates average pooling") {
  Rng rng(54);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor grid = uniform_tensor({2, 9, 5}, 4.0, rng, false);
    const Tensor mx = baseline_pool(grid, EarlyFusionKind::kMax);
    const Tensor avg = baseline_pool(grid, EarlyFusionKind::kAverage);
    for (std::size_t i = 0; i < mx.numel(); ++i) CHECK(mx[i] >= avg[i]);
  }
}

TEST_CASE("pooling is invariant to permuting positions") {
  Rng rng(55);
  const auto p = EarlyFusionParams::init(4, 5, rng);
  const Tensor audio = uniform_tensor({4}, 1.0, rng, false);
  const Tensor grid = uniform_tensor({9, 5}, 1.0, rng, false);
  std::vector<double> permuted(grid.numel());
  for (std::size_t pos = 0; pos < 9; ++pos) {
    for (std::size_t ch = 0; ch < 5; ++ch) permuted[((pos + 4) % 9) * 5 + ch] = grid[pos * 5 + ch];
  }
  const auto a = audio_guided_pool(p, audio, grid);
  const auto b = audio_guided_pool(p, audio, Tensor::from({9, 5}, permuted));
  CHECK(testutil::max_abs_diff(a.pooled, b.pooled) < 1e-14);
  for (std::size_t pos = 0; pos < 9; ++pos) {
    CHECK(b.weights[(pos + 4) % 9] == doctest::Approx(a.weights[pos]).epsilon(1e-13));
  }
}

TEST_CASE("audio-guided pooling gradient passes grad_check") {
  Rng rng(56);
  auto p = EarlyFusionParams::init(3, 4, rng);
  Tensor audio = uniform_tensor({2, 3}, 1.0, rng);
  Tensor grid = uniform_tensor({2, 5, 4}, 1.0, rng);
  const Tensor w = uniform_tensor({2, 4}, 1.0, rng, false);
  const auto report =
      grad_check([&] { return sum(mul(audio_guided_pool(p, audio, grid).pooled, w)); },
                 {p.audio_proj, audio, grid}, {"proj", "audio", "grid"});
  CHECK(report.passed);
}

TEST_CASE("early fusion dimension errors") {
  Rng rng(57);
  const auto p = EarlyFusionParams::init(3, 4, rng);
  CHECK_THROWS_AS(audio_guided_pool(p, Tensor::zeros({3}), Tensor::zeros({5, 6})), DimensionError);
  CHECK_THROWS_AS(audio_guided_pool(p, Tensor::zeros({2, 3}), Tensor::zeros({3, 5, 4})), DimensionError);
}
