#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ave/data_io.hpp"
#include "ave/grad_check.hpp"
#include "ave/model.hpp"
#include "ave/run_config.hpp"

namespace ave {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;
};

// Trains per the configuration, appending one CSV row per epoch to
// config.log_path and saving the best-validation (or, without a validation
// file, best-train) checkpoint to config.checkpoint_path. Training ends
// early when `keep_going` returns false after an epoch.
TrainResult train(const RunConfig& config, std::ostream& out,
                  const std::function<bool(const EpochMetrics&)>& keep_going = {});

struct EvalReport {
  double accuracy = 0.0;
  std::size_t segments = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<double> per_class_accuracy;           // NaN for absent classes
};

EvalReport evaluate(const Model& model, const Dataset& dataset, std::size_t batch_size = 32);

// Rebuilds the model stored in a checkpoint.
struct LoadedModel {
  RunConfig config;
  Model model;
};
LoadedModel load_model(const std::filesystem::path& checkpoint);

// Toy configuration used by `gradcheck`: N=4, d_a=d_v=8, k=4, ell=3,
// concatenation+FC, with small raw feature and head widths.
RunConfig gradcheck_toy_config();

struct ModelGradCheck {
  GradCheckReport report;
  double seconds = 0.0;
};

// Finite-difference check of every parameter block of the full model
// (early fusion -> encoders -> JCA stack -> head -> loss) on random inputs.
// Rejects configurations beyond toy size (N <= 6, widths <= 16).
ModelGradCheck model_grad_check(const RunConfig& config, double tolerance = 1e-4);

void write_confusion_csv(const std::filesystem::path& path, const EvalReport& report);

// Writes "<stem>.csv" and "<stem>.pgm" per segment plus config.json into
// `out_dir`; returns the per-segment weight grids.
std::vector<Tensor> dump_attention(const std::filesystem::path& checkpoint, const std::filesystem::path& features,
                                   std::size_t sequence_index, const std::filesystem::path& out_dir);

// Full command-line entry point: `ave <synth|train|eval|gradcheck|params|attend> ...`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ave
