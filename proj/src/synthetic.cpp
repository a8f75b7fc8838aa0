#include <algorithm>
#include <numeric>
#include <random>

#include "ave/data_io.hpp"
#include "ave/errors.hpp"

namespace ave {
namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t split, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(split), static_cast<std::uint32_t>(split >> 32), purpose};
  return std::mt19937_64(seq);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (class_count == 0 || class_count >= kInvalidLabel) {
    throw ConfigError("synthetic class_count must be in [1, 254]");
  }
  if (sequences_per_class == 0 || segments == 0) throw ConfigError("synthetic dataset would be empty");
  if (!(background_rate >= 0.0 && background_rate < 1.0)) {
    throw ConfigError("background_rate must lie in [0, 1)");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  if (audio_dim == 0 || visual_positions == 0 || visual_channels == 0) {
    throw ConfigError("synthetic feature extents must be positive");
  }
}

ClassPrototypes synthetic_prototypes(const SyntheticSpec& spec) {
  spec.validate();
  auto rng = stream(spec.seed, 0, 0x70726f74);
  std::normal_distribution<double> unit(0.0, 1.0);
  ClassPrototypes p;
  // Spread classes over distinct spatial cells while there are enough cells.
  std::vector<std::size_t> cells(spec.visual_positions);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  for (std::size_t i = cells.size() - 1; i > 0; --i) {
    std::swap(cells[i], cells[static_cast<std::size_t>(rng() % (i + 1))]);
  }
  for (std::size_t c = 0; c < spec.class_count; ++c) {
    std::vector<float> audio(spec.audio_dim);
    for (auto& v : audio) v = static_cast<float>(unit(rng));
    std::vector<float> visual(spec.visual_channels);
    for (auto& v : visual) v = static_cast<float>(unit(rng));
    p.audio.push_back(std::move(audio));
    p.visual.push_back(std::move(visual));
    p.position.push_back(cells[c % cells.size()]);
  }
  return p;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  const ClassPrototypes proto = synthetic_prototypes(spec);
  auto rng = stream(spec.seed, spec.split, 0x73616d70);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution is_background(spec.background_rate);
  const auto noise = [&] { return spec.noise_sigma * unit(rng); };

  Dataset ds;
  ds.dims = {spec.segments, spec.audio_dim, spec.visual_positions, spec.visual_channels};
  const std::size_t grid = spec.visual_positions * spec.visual_channels;
  const auto background = static_cast<std::uint8_t>(spec.class_count);
  for (std::size_t c = 0; c < spec.class_count; ++c) {
    for (std::size_t s = 0; s < spec.sequences_per_class; ++s) {
      Sequence seq;
      seq.audio.resize(spec.segments * spec.audio_dim);
      seq.visual.resize(spec.segments * grid);
      seq.labels.resize(spec.segments);
      for (std::size_t t = 0; t < spec.segments; ++t) {
        const bool bg = is_background(rng);
        seq.labels[t] = bg ? background : static_cast<std::uint8_t>(c);
        float* audio = seq.audio.data() + t * spec.audio_dim;
        for (std::size_t i = 0; i < spec.audio_dim; ++i) {
          audio[i] = static_cast<float>((bg ? 0.0 : proto.audio[c][i]) + noise());
        }
        float* visual = seq.visual.data() + t * grid;
        for (std::size_t pos = 0; pos < spec.visual_positions; ++pos) {
          const bool hot = !bg && pos == proto.position[c];
          for (std::size_t ch = 0; ch < spec.visual_channels; ++ch) {
            visual[pos * spec.visual_channels + ch] =
                static_cast<float>((hot ? proto.visual[c][ch] : 0.0) + noise());
          }
        }
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  return ds;
}

}  // namespace ave
