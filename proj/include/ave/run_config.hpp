#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "ave/model.hpp"

namespace ave {

// Everything a run needs. Serialized as one flat JSON object whose keys
// mirror the field names (N, d_a, d_v, k, ell, fusion_strategy, ...).
struct RunConfig {
  ModelConfig model;
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::optional<std::uint64_t> seed;
  std::string train_path;
  std::string val_path;
  std::string test_path;
  std::string checkpoint_path;
  std::string log_path;

  // Explicit seed, else $AVE_SEED, else 0.
  std::uint64_t resolved_seed() const;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);

  void validate() const;
};

std::string to_string(ResidualMode mode);
std::string to_string(CoattentionMode mode);
std::string to_string(EarlyFusionKind kind);
ResidualMode parse_residual_mode(const std::string& s);
CoattentionMode parse_coattention_mode(const std::string& s);
EarlyFusionKind parse_early_fusion(const std::string& s);

}  // namespace ave
