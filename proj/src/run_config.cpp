#include "ave/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "ave/errors.hpp"

namespace ave {

std::string to_string(ResidualMode mode) {
  switch (mode) {
    case ResidualMode::kOff: return "off";
    case ResidualMode::kInput: return "input";
    case ResidualMode::kOutput: return "output";
  }
  return "?";
}

std::string to_string(CoattentionMode mode) {
  return mode == CoattentionMode::kJoint ? "joint" : "original";
}

std::string to_string(EarlyFusionKind kind) {
  switch (kind) {
    case EarlyFusionKind::kAudioGuided: return "audio_guided";
    case EarlyFusionKind::kAverage: return "average";
    case EarlyFusionKind::kMax: return "max";
  }
  return "?";
}

ResidualMode parse_residual_mode(const std::string& s) {
  if (s == "off") return ResidualMode::kOff;
  if (s == "input") return ResidualMode::kInput;
  if (s == "output") return ResidualMode::kOutput;
  throw ConfigError("residual mode must be input, output or off, got '" + s + "'");
}

CoattentionMode parse_coattention_mode(const std::string& s) {
  if (s == "joint") return CoattentionMode::kJoint;
  if (s == "original") return CoattentionMode::kOriginal;
  throw ConfigError("coattention_mode must be joint or original, got '" + s + "'");
}

EarlyFusionKind parse_early_fusion(const std::string& s) {
  if (s == "audio_guided") return EarlyFusionKind::kAudioGuided;
  if (s == "average") return EarlyFusionKind::kAverage;
  if (s == "max") return EarlyFusionKind::kMax;
  throw ConfigError("early_fusion must be audio_guided, average or max, got '" + s + "'");
}

std::uint64_t RunConfig::resolved_seed() const {
  if (seed) return *seed;
  if (const char* env = std::getenv("AVE_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') throw ConfigError(std::string("AVE_SEED is not an integer: ") + env);
    return v;
  }
  return 0;
}

nlohmann::json RunConfig::to_json() const {
  const auto& m = model;
  nlohmann::json j;
  j["N"] = m.segments;
  j["audio_dim"] = m.audio_dim;
  j["visual_positions"] = m.visual_positions;
  j["visual_channels"] = m.visual_channels;
  j["d_a"] = m.d_a;
  j["d_v"] = m.d_v;
  j["k"] = m.effective_k();
  j["ell"] = m.depth;
  j["fusion_strategy"] = m.fusion.name();
  j["residual_embedding"] = m.residual != ResidualMode::kOff;
  j["residual_mode"] = m.residual == ResidualMode::kOutput ? "output" : "input";
  j["coattention_mode"] = to_string(m.coattention);
  j["early_fusion"] = to_string(m.early_fusion);
  j["class_count"] = m.class_count;
  j["joint_hidden"] = m.effective_joint_hidden();
  j["mlp_hidden1"] = m.mlp_hidden1;
  j["mlp_hidden2"] = m.mlp_hidden2;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["seed"] = resolved_seed();
  j["train_path"] = train_path;
  j["val_path"] = val_path;
  j["test_path"] = test_path;
  j["checkpoint_path"] = checkpoint_path;
  j["log_path"] = log_path;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, RunConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "N",           "audio_dim",    "visual_positions", "visual_channels", "d_a",           "d_v",
      "k",           "ell",          "fusion_strategy",  "residual_embedding", "residual_mode", "coattention_mode",
      "early_fusion", "class_count", "joint_hidden",     "mlp_hidden1",     "mlp_hidden2",   "learning_rate",
      "epochs",      "batch_size",   "seed",             "train_path",      "val_path",      "test_path",
      "checkpoint_path", "log_path"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c = std::move(base);
  auto& m = c.model;
  try {
    auto size = [&](const char* key, std::size_t& out) {
      if (j.contains(key)) out = j.at(key).get<std::size_t>();
    };
    auto text = [&](const char* key, std::string& out) {
      if (j.contains(key)) out = j.at(key).get<std::string>();
    };
    size("N", m.segments);
    size("audio_dim", m.audio_dim);
    size("visual_positions", m.visual_positions);
    size("visual_channels", m.visual_channels);
    size("d_a", m.d_a);
    size("d_v", m.d_v);
    size("k", m.k);
    size("ell", m.depth);
    size("class_count", m.class_count);
    size("joint_hidden", m.joint_hidden);
    size("mlp_hidden1", m.mlp_hidden1);
    size("mlp_hidden2", m.mlp_hidden2);
    size("epochs", c.epochs);
    size("batch_size", c.batch_size);
    if (j.contains("fusion_strategy")) m.fusion = FusionStrategy::parse(j.at("fusion_strategy").get<std::string>());
    bool residual_on = m.residual != ResidualMode::kOff;
    std::string residual_mode = m.residual == ResidualMode::kOutput ? "output" : "input";
    if (j.contains("residual_embedding")) residual_on = j.at("residual_embedding").get<bool>();
    text("residual_mode", residual_mode);
    m.residual = residual_on ? parse_residual_mode(residual_mode) : ResidualMode::kOff;
    if (m.residual == ResidualMode::kOff && residual_on) throw ConfigError("residual_mode must be input or output");
    if (j.contains("coattention_mode")) m.coattention = parse_coattention_mode(j.at("coattention_mode"));
    if (j.contains("early_fusion")) m.early_fusion = parse_early_fusion(j.at("early_fusion"));
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    text("train_path", c.train_path);
    text("val_path", c.val_path);
    text("test_path", c.test_path);
    text("checkpoint_path", c.checkpoint_path);
    text("log_path", c.log_path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) { return from_json(j, RunConfig{}); }

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void RunConfig::validate() const {
  model.validate();
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

}  // namespace ave
