#include "ave/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "ave/errors.hpp"
#include "ave/head.hpp"
#include "ave/ops.hpp"
#include "ave/optimizer.hpp"

namespace ave {
namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_config_echo(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "cannot write " + path.string());
  out << config.to_json().dump(2) << '\n';
}

DatasetDims model_dims(const ModelConfig& m) {
  return {m.segments, m.audio_dim, m.visual_positions, m.visual_channels};
}

std::string describe(const DatasetDims& d) {
  return "N=" + std::to_string(d.segments) + " audio_dim=" + std::to_string(d.audio_dim) +
         " visual_positions=" + std::to_string(d.visual_positions) +
         " visual_channels=" + std::to_string(d.visual_channels);
}

Dataset load_matching(const std::string& path, const ModelConfig& model, const char* role) {
  if (path.empty()) throw ConfigError(std::string(role) + " feature file not configured");
  Dataset ds = read_feature_file(path, model.class_count);
  if (!(ds.dims == model_dims(model))) {
    throw ConfigError(std::string(role) + " file " + path + " has " + describe(ds.dims) + " but the model expects " +
                      describe(model_dims(model)));
  }
  return ds;
}

}  // namespace

EvalReport evaluate(const Model& model, const Dataset& dataset, std::size_t batch_size) {
  if (dataset.sequences.empty()) throw ContractError("evaluate: empty evaluation set");
  NoGradGuard no_grad;
  const std::size_t classes = model.config().class_count;
  EvalReport r;
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (const auto& idx : make_batches(dataset.sequences.size(), batch_size, 0, false)) {
    Batch batch = make_batch(dataset, idx);
    const auto pred = argmax_rows(model.forward(batch.input).logits);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const auto truth = batch.labels[i];
      if (truth >= classes) throw ContractError("evaluate: label exceeds class count");
      ++r.confusion[truth][pred[i]];
      correct += pred[i] == truth;
    }
    r.segments += pred.size();
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.segments);
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t total = 0;
    for (auto v : r.confusion[c]) total += v;
    r.per_class_accuracy.push_back(total == 0 ? std::numeric_limits<double>::quiet_NaN()
                                              : static_cast<double>(r.confusion[c][c]) / static_cast<double>(total));
  }
  return r;
}

TrainResult train(const RunConfig& config, std::ostream& out,
                  const std::function<bool(const EpochMetrics&)>& keep_going) {
  config.validate();
  const std::uint64_t seed = config.resolved_seed();
  if (config.checkpoint_path.empty()) throw ConfigError("checkpoint_path not configured");
  if (config.log_path.empty()) throw ConfigError("log_path not configured");
  const Dataset train_set = load_matching(config.train_path, config.model, "train");
  std::optional<Dataset> val_set;
  if (!config.val_path.empty()) val_set = load_matching(config.val_path, config.model, "validation");

  Model model(config.model, seed);
  const ParameterList params = model.parameters();
  Adam optimizer(params, AdamOptions{config.learning_rate});

  const std::filesystem::path log_path = config.log_path;
  const bool fresh = !std::filesystem::exists(log_path) || std::filesystem::file_size(log_path) == 0;
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw ParseError(ParseErrorKind::kIo, 0, "cannot open log " + log_path.string());
  if (fresh) log << "epoch,train_loss,train_acc,val_acc\n";
  RunConfig echo = config;
  echo.seed = seed;
  write_config_echo(log_path.string() + ".config.json", echo);
  const std::string config_json = echo.to_json().dump();

  TrainResult result;
  double best = -1.0;
  auto& tape = Tape::current();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& idx : make_batches(train_set.sequences.size(), config.batch_size, seed * 1000003ull + epoch)) {
      tape.reset();
      Batch batch = make_batch(train_set, idx);
      Tensor logits = model.forward(batch.input).logits;
      Tensor loss = mlsm_loss(logits, one_hot(batch.labels, config.model.class_count));
      backward(loss);
      optimizer.step();
      loss_sum += loss.item() * static_cast<double>(batch.labels.size());
      seen += batch.labels.size();
    }
    tape.reset();

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(seen);
    m.train_accuracy = evaluate(model, train_set).accuracy;
    if (val_set) m.val_accuracy = evaluate(model, *val_set).accuracy;
    log << epoch << ',' << format_double(m.train_loss) << ',' << format_double(m.train_accuracy) << ','
        << (m.val_accuracy ? format_double(*m.val_accuracy) : std::string()) << '\n';
    log.flush();
    out << "epoch " << epoch << " loss " << m.train_loss << " train_acc " << m.train_accuracy;
    if (m.val_accuracy) out << " val_acc " << *m.val_accuracy;
    out << '\n';

    const double score = m.val_accuracy ? *m.val_accuracy : m.train_accuracy;
    if (score > best) {
      best = score;
      result.best_epoch = epoch;
      save_checkpoint(config.checkpoint_path, config_json, params);
    }
    result.epochs.push_back(m);
    if (keep_going && !keep_going(m)) break;
  }
  return result;
}

LoadedModel load_model(const std::filesystem::path& checkpoint) {
  CheckpointContents contents = read_checkpoint(checkpoint);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(contents.config_json);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::kMalformed, 10, std::string("checkpoint config is not JSON: ") + e.what());
  }
  RunConfig config = RunConfig::from_json(j);
  Model model(config.model, config.resolved_seed());
  load_checkpoint_into(contents, model.parameters());
  return {std::move(config), std::move(model)};
}

RunConfig gradcheck_toy_config() {
  RunConfig c;
  auto& m = c.model;
  m.segments = 4;
  m.audio_dim = 6;
  m.visual_positions = 4;
  m.visual_channels = 5;
  m.d_a = 8;
  m.d_v = 8;
  m.k = 4;
  m.depth = 3;
  m.fusion = {FusionCombine::kConcatenation, true};
  m.class_count = 3;
  m.joint_hidden = 4;
  m.mlp_hidden1 = 8;
  m.mlp_hidden2 = 8;
  c.batch_size = 2;
  c.seed = 11;
  return c;
}

ModelGradCheck model_grad_check(const RunConfig& config, double tolerance) {
  const auto& m = config.model;
  m.validate();
  const std::size_t widths[] = {m.audio_dim,    m.visual_positions, m.visual_channels,          m.d_a,
                                m.d_v,          m.effective_k(),    m.effective_joint_hidden(), m.mlp_hidden1,
                                m.mlp_hidden2,  m.class_count};
  if (m.segments > 6) throw ConfigError("gradcheck needs N <= 6, got " + std::to_string(m.segments));
  for (auto w : widths) {
    if (w > 16) throw ConfigError("gradcheck needs every width <= 16 (finite differences infeasible beyond toy size)");
  }
  if (config.batch_size > 4) throw ConfigError("gradcheck needs batch_size <= 4");

  const std::uint64_t seed = config.resolved_seed();
  Model model(m, seed);
  Rng rng(seed ^ 0x5eedf00dull);
  const std::size_t batch = config.batch_size;
  Tensor audio = uniform_tensor({batch, m.segments, m.audio_dim}, 2.0, rng, false);
  Tensor visual = uniform_tensor({batch, m.segments, m.visual_positions, m.visual_channels}, 2.0, rng, false);
  std::vector<std::uint8_t> labels(batch * m.segments);
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng() % m.class_count);
  const Tensor targets = one_hot(labels, m.class_count);

  const ParameterList params = model.parameters();
  std::vector<Tensor> inputs;
  std::vector<std::string> names;
  for (const auto& p : params) {
    inputs.push_back(p.tensor);
    names.push_back(p.name);
  }
  const auto start = std::chrono::steady_clock::now();
  GradCheckOptions options;
  options.tolerance = tolerance;
  ModelGradCheck out;
  out.report = grad_check(
      [&] { return mlsm_loss(model.forward({audio, visual}).logits, targets); }, inputs, names, options);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_confusion_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "cannot write " + path.string());
  const std::size_t classes = report.confusion.size();
  out << "true\\pred";
  for (std::size_t c = 0; c < classes; ++c) out << ',' << c;
  out << '\n';
  for (std::size_t t = 0; t < classes; ++t) {
    out << t;
    for (auto v : report.confusion[t]) out << ',' << v;
    out << '\n';
  }
}

std::vector<Tensor> dump_attention(const std::filesystem::path& checkpoint, const std::filesystem::path& features,
                                   std::size_t sequence_index, const std::filesystem::path& out_dir) {
  LoadedModel loaded = load_model(checkpoint);
  const auto& m = loaded.config.model;
  if (m.early_fusion != EarlyFusionKind::kAudioGuided) {
    throw ConfigError("attention maps exist only for audio_guided early fusion, checkpoint uses " +
                      to_string(m.early_fusion));
  }
  const Dataset ds = load_matching(features.string(), m, "feature");
  if (sequence_index >= ds.sequences.size()) {
    throw ContractError("sequence index " + std::to_string(sequence_index) + " out of range [0, " +
                        std::to_string(ds.sequences.size()) + ")");
  }
  std::filesystem::create_directories(out_dir);
  write_config_echo(out_dir / "config.json", loaded.config);

  NoGradGuard no_grad;
  const std::size_t idx[] = {sequence_index};
  Batch batch = make_batch(ds, idx);
  const Tensor weights = loaded.model.forward(batch.input).visual_weights;

  const std::size_t positions = m.visual_positions;
  auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(positions))));
  const std::size_t rows = side * side == positions ? side : 1;
  const std::size_t cols = positions / rows;
  constexpr std::size_t kCell = 16;

  std::vector<Tensor> grids;
  for (std::size_t t = 0; t < m.segments; ++t) {
    std::vector<double> w(weights.data().begin() + static_cast<std::ptrdiff_t>(t * positions),
                          weights.data().begin() + static_cast<std::ptrdiff_t>((t + 1) * positions));
    char stem[32];
    std::snprintf(stem, sizeof(stem), "segment_%02zu", t);

    std::ofstream csv(out_dir / (std::string(stem) + ".csv"), std::ios::trunc);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) csv << (c ? "," : "") << format_double(w[r * cols + c]);
      csv << '\n';
    }

    const double peak = *std::max_element(w.begin(), w.end());
    std::ofstream pgm(out_dir / (std::string(stem) + ".pgm"), std::ios::binary | std::ios::trunc);
    pgm << "P5\n" << cols * kCell << ' ' << rows * kCell << "\n255\n";
    for (std::size_t y = 0; y < rows * kCell; ++y) {
      for (std::size_t x = 0; x < cols * kCell; ++x) {
        const double v = peak > 0 ? w[(y / kCell) * cols + x / kCell] / peak : 0.0;
        pgm.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
      }
    }
    if (!csv || !pgm) throw ParseError(ParseErrorKind::kIo, 0, "cannot write heatmaps to " + out_dir.string());
    grids.push_back(Tensor::from({rows, cols}, std::move(w)));
  }
  return grids;
}

namespace {

struct Overrides {
  std::size_t n = 0, audio_dim = 0, positions = 0, channels = 0, d_a = 0, d_v = 0, k = 0, ell = 0;
  std::size_t class_count = 0, joint_hidden = 0, mlp1 = 0, mlp2 = 0, epochs = 0, batch_size = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  std::string fusion, residual, coattention, early_fusion, train, val, test, checkpoint, log;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration");
    bind(app, "--n", n, "segments per sequence", [this](RunConfig& c) { c.model.segments = n; });
    bind(app, "--audio-dim", audio_dim, "raw audio width", [this](RunConfig& c) { c.model.audio_dim = audio_dim; });
    bind(app, "--positions", positions, "visual grid positions",
         [this](RunConfig& c) { c.model.visual_positions = positions; });
    bind(app, "--channels", channels, "visual channels", [this](RunConfig& c) { c.model.visual_channels = channels; });
    bind(app, "--d-a", d_a, "audio representation width", [this](RunConfig& c) { c.model.d_a = d_a; });
    bind(app, "--d-v", d_v, "visual representation width", [this](RunConfig& c) { c.model.d_v = d_v; });
    bind(app, "--k", k, "attention map rows", [this](RunConfig& c) { c.model.k = k; });
    bind(app, "--ell", ell, "JCA recursion depth", [this](RunConfig& c) { c.model.depth = ell; });
    bind(app, "--class-count", class_count, "classes including background",
         [this](RunConfig& c) { c.model.class_count = class_count; });
    bind(app, "--joint-hidden", joint_hidden, "joint Bi-LSTM width per direction",
         [this](RunConfig& c) { c.model.joint_hidden = joint_hidden; });
    bind(app, "--mlp1", mlp1, "first MLP width", [this](RunConfig& c) { c.model.mlp_hidden1 = mlp1; });
    bind(app, "--mlp2", mlp2, "second MLP width", [this](RunConfig& c) { c.model.mlp_hidden2 = mlp2; });
    bind(app, "--epochs", epochs, "training epochs", [this](RunConfig& c) { c.epochs = epochs; });
    bind(app, "--batch-size", batch_size, "sequences per batch", [this](RunConfig& c) { c.batch_size = batch_size; });
    bind(app, "--lr", lr, "learning rate", [this](RunConfig& c) { c.learning_rate = lr; });
    bind(app, "--seed", seed, "seed", [this](RunConfig& c) { c.seed = seed; });
    bind(app, "--fusion", fusion, "addition|multiplication|concatenation[_fc]",
         [this](RunConfig& c) { c.model.fusion = FusionStrategy::parse(fusion); });
    bind(app, "--residual", residual, "input|output|off",
         [this](RunConfig& c) { c.model.residual = parse_residual_mode(residual); });
    bind(app, "--coattention", coattention, "joint|original",
         [this](RunConfig& c) { c.model.coattention = parse_coattention_mode(coattention); });
    bind(app, "--early-fusion", early_fusion, "audio_guided|average|max",
         [this](RunConfig& c) { c.model.early_fusion = parse_early_fusion(early_fusion); });
    bind(app, "--train", train, "training feature file", [this](RunConfig& c) { c.train_path = train; });
    bind(app, "--val", val, "validation feature file", [this](RunConfig& c) { c.val_path = val; });
    bind(app, "--test", test, "test feature file", [this](RunConfig& c) { c.test_path = test; });
    bind(app, "--checkpoint", checkpoint, "checkpoint path", [this](RunConfig& c) { c.checkpoint_path = checkpoint; });
    bind(app, "--log", log, "metrics log path", [this](RunConfig& c) { c.log_path = log; });
  }

  template <class T>
  void bind(CLI::App* app, const char* flag, T& target, const char* help, std::function<void(RunConfig&)> apply) {
    setters.emplace_back(app->add_option(flag, target, help), std::move(apply));
  }

  RunConfig resolve(RunConfig base) const {
    RunConfig c = config_path.empty() ? std::move(base) : RunConfig::load(config_path);
    for (const auto& [opt, apply] : setters) {
      if (opt->count() > 0) apply(c);
    }
    return c;
  }
};

int cmd_synth(const SyntheticSpec& spec, const std::string& out_path, std::ostream& out) {
  spec.validate();
  const Dataset ds = generate_synthetic(spec);
  write_feature_file(out_path, ds);
  std::vector<std::size_t> counts(spec.class_count + 1, 0);
  for (const auto& s : ds.sequences) {
    for (auto l : s.labels) ++counts[l];
  }
  out << "wrote " << out_path << ": " << ds.sequences.size() << " sequences, " << ds.segment_count() << " segments\n";
  for (std::size_t c = 0; c < spec.class_count; ++c) out << "class " << c << ": " << counts[c] << " segments\n";
  out << "background (" << spec.class_count << "): " << counts.back() << " segments, fraction "
      << static_cast<double>(counts.back()) / static_cast<double>(ds.segment_count()) << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& features, std::string confusion_path,
             std::ostream& out) {
  LoadedModel loaded = load_model(checkpoint);
  const Dataset ds = load_matching(features, loaded.config.model, "evaluation");
  const EvalReport r = evaluate(loaded.model, ds);
  if (confusion_path.empty()) confusion_path = checkpoint + ".confusion.csv";
  write_confusion_csv(confusion_path, r);
  write_config_echo(confusion_path + ".config.json", loaded.config);
  out << "segment_accuracy " << format_double(r.accuracy) << " over " << r.segments << " segments\n";
  for (std::size_t c = 0; c < r.per_class_accuracy.size(); ++c) {
    out << "class " << c << " accuracy " << r.per_class_accuracy[c] << '\n';
  }
  out << "confusion matrix written to " << confusion_path << '\n';
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, double tol, const std::string& fault, std::ostream& out) {
  if (!fault.empty()) set_gradient_fault(fault);
  ModelGradCheck result;
  try {
    result = model_grad_check(config, tol);
  } catch (...) {
    set_gradient_fault(std::nullopt);
    throw;
  }
  set_gradient_fault(std::nullopt);
  out << std::left << std::setw(44) << "block" << std::setw(10) << "checked" << std::setw(10) << "excluded"
      << "max_rel_error\n";
  for (const auto& r : result.report.inputs) {
    out << std::setw(44) << r.name << std::setw(10) << r.checked << std::setw(10) << r.excluded
        << r.max_rel_error << '\n';
  }
  out << (result.report.passed ? "PASS" : "FAIL") << " max relative error " << result.report.max_rel_error
      << " (tolerance " << tol << ", " << result.seconds << " s)\n";
  return result.report.passed ? kExitOk : kExitVerificationFailed;
}

int cmd_params(const RunConfig& config, bool sweep, bool strategy_sweep, std::ostream& out) {
  const auto b = count_parameters(config.model);
  out << "module,parameters\n";
  for (const auto& [name, count] : b.modules) out << name << ',' << count << '\n';
  out << "total," << b.total() << '\n';
  if (sweep) {
    out << "\nell,total,increment\n";
    std::size_t prev = 0;
    for (std::size_t ell = 1; ell <= 5; ++ell) {
      ModelConfig m = config.model;
      m.depth = ell;
      const std::size_t total = count_parameters(m).total();
      out << ell << ',' << total << ',';
      if (ell > 1) out << total - prev;
      out << '\n';
      prev = total;
    }
  }
  if (strategy_sweep) {
    out << "\nstrategy,total\n";
    for (auto combine : {FusionCombine::kAddition, FusionCombine::kMultiplication, FusionCombine::kConcatenation}) {
      for (bool fc : {false, true}) {
        ModelConfig m = config.model;
        m.fusion = {combine, fc};
        out << m.fusion.name() << ',' << count_parameters(m).total() << '\n';
      }
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint co-attention audio-visual event localization", "ave"};
  app.require_subcommand(1, 1);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature file");
  SyntheticSpec spec;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--classes", spec.class_count, "event classes");
  synth->add_option("--per-class", spec.sequences_per_class, "sequences per class");
  synth->add_option("--n", spec.segments, "segments per sequence");
  synth->add_option("--background-rate", spec.background_rate, "probability a segment is background");
  synth->add_option("--sigma", spec.noise_sigma, "gaussian noise sigma");
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "prototype/sample seed");
  synth->add_option("--split", spec.split, "independent sample draw (0=train, 1=val, ...)");
  synth->add_option("--audio-dim", spec.audio_dim, "audio width");
  synth->add_option("--positions", spec.visual_positions, "visual grid positions");
  synth->add_option("--channels", spec.visual_channels, "visual channels");
  synth->add_option("--out", synth_out, "output feature file")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a model");
  Overrides train_over;
  train_over.add(train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a feature file");
  std::string eval_ckpt, eval_features, eval_confusion;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint")->required();
  eval_cmd->add_option("--features", eval_features, "feature file")->required();
  eval_cmd->add_option("--confusion", eval_confusion, "confusion matrix CSV output");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the full model");
  Overrides grad_over;
  grad_over.add(grad_cmd);
  double grad_tol = 1e-4;
  std::string grad_fault;
  grad_cmd->add_option("--tol", grad_tol, "relative error tolerance");
  grad_cmd->add_option("--inject-fault", grad_fault, "corrupt one op's gradient rule (negative control)");

  auto* params_cmd = app.add_subcommand("params", "Parameter accounting");
  Overrides params_over;
  params_over.add(params_cmd);
  bool sweep = false, strategy_sweep = false;
  params_cmd->add_flag("--sweep", sweep, "sweep ell = 1..5 and print increments");
  params_cmd->add_flag("--strategy-sweep", strategy_sweep, "count every fusion strategy");

  auto* attend_cmd = app.add_subcommand("attend", "Export early-fusion attention heatmaps");
  std::string att_ckpt, att_features, att_out;
  std::size_t att_index = 0;
  attend_cmd->add_option("--checkpoint", att_ckpt, "checkpoint")->required();
  attend_cmd->add_option("--features", att_features, "feature file")->required();
  attend_cmd->add_option("--index", att_index, "sequence index")->required();
  attend_cmd->add_option("--out-dir", att_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      RunConfig seed_source;
      if (synth_seed_opt->count() > 0) seed_source.seed = synth_seed;
      spec.seed = seed_source.resolved_seed();
      return cmd_synth(spec, synth_out, out);
    }
    if (train_cmd->parsed()) {
      train(train_over.resolve({}), out);
      return kExitOk;
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_ckpt, eval_features, eval_confusion, out);
    if (grad_cmd->parsed()) return cmd_gradcheck(grad_over.resolve(gradcheck_toy_config()), grad_tol, grad_fault, out);
    if (params_cmd->parsed()) return cmd_params(params_over.resolve({}), sweep, strategy_sweep, out);
    if (attend_cmd->parsed()) {
      const auto grids = dump_attention(att_ckpt, att_features, att_index, att_out);
      out << "wrote " << grids.size() << " heatmaps to " << att_out << '\n';
      return kExitOk;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace ave
