#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ave/model.hpp"
#include "ave/parameters.hpp"

namespace ave {

// Label byte reserved as invalid in feature files.
inline constexpr std::uint8_t kInvalidLabel = 255;

struct DatasetDims {
  std::size_t segments = 10;
  std::size_t audio_dim = 128;
  std::size_t visual_positions = 49;
  std::size_t visual_channels = 512;

  bool operator==(const DatasetDims&) const = default;
};

// One video: per-segment audio [N x audio_dim], visual grids
// [N x positions x channels] (position-major), and class labels. Features are
// kept at their on-disk float32 precision and widened when batched.
struct Sequence {
  std::vector<float> audio;
  std::vector<float> visual;
  std::vector<std::uint8_t> labels;
};

struct Dataset {
  DatasetDims dims;
  std::vector<Sequence> sequences;

  std::size_t segment_count() const { return sequences.size() * dims.segments; }
};

// Feature file layout, little-endian throughout:
//   "AVEF" | u16 version=1 | u32 sequence_count | u16 N | u16 audio_dim |
//   u16 visual_positions | u16 visual_channels
//   then per sequence: N*audio_dim f32, N*positions*channels f32, N u8 labels.
inline constexpr std::uint16_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 18;

void write_feature_file(const std::filesystem::path& path, const Dataset& dataset);

// Streams the payload after validating the header. Labels must differ from
// 255 and, when `class_count` is given, lie below it.
Dataset read_feature_file(const std::filesystem::path& path, std::optional<std::size_t> class_count = {});

// Checkpoint layout, little-endian:
//   "AVEC" | u16 version=1 | u32 config_len | config JSON bytes |
//   u32 block_count | per block: u16 name_len, name, u8 rank, u32 extents...,
//   f64 values | u32 CRC-32 of every preceding byte.
inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const std::string& config_json,
                     const ParameterList& params);

struct CheckpointContents {
  std::string config_json;
  std::vector<std::pair<std::string, Tensor>> blocks;
};

CheckpointContents read_checkpoint(const std::filesystem::path& path);

// Copies checkpoint values into `params`; names and shapes must match exactly.
void load_checkpoint_into(const CheckpointContents& contents, const ParameterList& params);

struct SyntheticSpec {
  std::size_t class_count = 5;  // event classes; background is label class_count
  std::size_t sequences_per_class = 64;
  std::size_t segments = 10;
  double background_rate = 0.2;
  double noise_sigma = 0.1;
  std::uint64_t seed = 7;
  // Selects an independent draw of segments sharing the same class prototypes
  // (0 = train, 1 = validation, ...).
  std::uint64_t split = 0;
  std::size_t audio_dim = 128;
  std::size_t visual_positions = 49;
  std::size_t visual_channels = 512;

  void validate() const;
};

struct ClassPrototypes {
  std::vector<std::vector<float>> audio;   // [class][audio_dim]
  std::vector<std::vector<float>> visual;  // [class][channels]
  std::vector<std::size_t> position;       // [class] spatial cell of the visual pattern
};

ClassPrototypes synthetic_prototypes(const SyntheticSpec& spec);
Dataset generate_synthetic(const SyntheticSpec& spec);

// Deterministic epoch partition into index batches of at most `batch_size`.
std::vector<std::vector<std::size_t>> make_batches(std::size_t sequence_count, std::size_t batch_size,
                                                   std::uint64_t shuffle_seed, bool shuffle = true);

// Widens the selected sequences into model input tensors and a flat label list.
struct Batch {
  ModelInput input;
  std::vector<std::uint8_t> labels;  // B*N, row-major
};
Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices);

// CRC-32 (zlib polynomial) of a whole file.
std::uint32_t file_crc32(const std::filesystem::path& path);

}  // namespace ave
