#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bloom/corpus.hpp"
#include "bloom/model.hpp"
#include "bloom/model_io.hpp"
#include "bloom/textpipe.hpp"

namespace bloom {

enum class OptimizerKind { Adam, Sgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view s);

/// All knobs of a training run. Every field has a key in the key=value
/// config format (see `config_keys()`), and the CLI exposes each key as a
/// `--kebab-case` flag.
struct TrainingConfig {
  Task task = Task::Cognitive;
  Architecture architecture = Architecture::Cnn;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.005;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double spatial_dropout = 0.7;
  double lstm_dropout = 0.7;
  double recurrent_dropout = 0.7;
  std::size_t emb_dim = 50;
  std::size_t num_words = 5000;
  std::size_t maxlen = 30;
  std::size_t kernel_width = 3;
  std::size_t num_filters = 64;
  std::size_t lstm_units = 10;
  OutputActivation cnn_output = OutputActivation::Softmax;
  bool fit_on_all = false;
  std::uint64_t seed = 42;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  /// Sets one field from its config key; unknown keys are rejected.
  void set(std::string_view key, std::string_view value);

  /// Snapshot in canonical key order.
  KeyValues to_key_values() const;
  static TrainingConfig from_key_values(const KeyValues& kv);

  /// Parses `key = value` lines; `#` starts a comment.
  static TrainingConfig parse(std::string_view text, TrainingConfig base);
  static TrainingConfig parse(std::string_view text);
  static TrainingConfig load(const std::filesystem::path& path, TrainingConfig base);
  static TrainingConfig load(const std::filesystem::path& path);

  DropoutConfig dropout() const { return {spatial_dropout, lstm_dropout, recurrent_dropout}; }
  TokenizerConfig tokenizer() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct ConfigKey {
  std::string_view key;
  std::string_view help;
};

/// Every config key with a one-line description, in canonical order.
const std::vector<ConfigKey>& config_keys();

// ---- initialization and optimization ---------------------------------------

/// Glorot-uniform weights, zero biases (forget gate 1.0), embeddings in
/// U(-0.05, 0.05). Deterministic in config.seed.
ModelParams init_params(const TrainingConfig& config, std::size_t vocab_size);

struct OptimizerState {
  std::uint64_t step = 0;
  ModelParams first_moment;
  ModelParams second_moment;
};

OptimizerState make_optimizer_state(const ModelParams& params);

/// One update. Throws NumericError on a non-finite gradient entry.
void optimizer_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, const TrainingConfig& config);

// ---- data-parallel kernels --------------------------------------------------

/// A corpus run through the text pipeline for one task.
struct EncodedSet {
  SequenceMatrix inputs;
  std::vector<std::size_t> labels;
  Task task = Task::Cognitive;

  std::size_t size() const { return labels.size(); }
};

EncodedSet encode_dataset(const CorpusDataset& ds, const Vocabulary& vocab, Task task, std::size_t maxlen);

namespace kernels {

struct BatchGradient {
  double loss_sum = 0.0;
  ModelParams grad_sum;
};

/// Sum of per-sample losses and gradients over `batch` (row indices into
/// `data`). Sample i draws its dropout masks from a generator seeded with
/// mix_seed(seed, epoch, batch[i]), so results do not depend on scheduling.
/// Per-sample gradients are reduced in batch order.
BatchGradient batch_gradient_serial(const ModelParams& params, const EncodedSet& data,
                                    std::span<const std::size_t> batch, const DropoutConfig& dropout, nn::Mode mode,
                                    std::uint64_t seed, std::uint64_t epoch);

/// OpenMP version of batch_gradient_serial; bit-identical results.
BatchGradient batch_gradient_parallel(const ModelParams& params, const EncodedSet& data,
                                      std::span<const std::size_t> batch, const DropoutConfig& dropout,
                                      nn::Mode mode, std::uint64_t seed, std::uint64_t epoch);

/// Infer-mode probabilities for every row of `inputs`, in row order.
std::vector<Probabilities> predict_all_serial(const ModelParams& params, const SequenceMatrix& inputs);
std::vector<Probabilities> predict_all_parallel(const ModelParams& params, const SequenceMatrix& inputs);

}  // namespace kernels

// ---- training ----------------------------------------------------------------

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_accuracy = 0.0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double test_loss = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainHistory {
  TrainingConfig config;
  std::vector<EpochMetrics> epochs;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct FitResult {
  TrainHistory history;
  SavedModel model;
};

/// Accuracy (argmax, lowest index wins ties) and mean cross-entropy.
struct Score {
  double accuracy = 0.0;
  double loss = 0.0;
};
Score score_predictions(std::span<const Probabilities> probs, std::span<const std::size_t> labels, Task task);

/// Fits the vocabulary on the training split (or both splits with
/// fit_on_all), then trains with seeded shuffling and mini-batches,
/// recording infer-mode metrics on both splits after every epoch.
FitResult fit(const CorpusDataset& train_ds, const CorpusDataset& test_ds, const TrainingConfig& config);

/// Trains on pre-encoded data with a given vocabulary.
FitResult fit_encoded(const EncodedSet& train, const EncodedSet& test, const Vocabulary& vocab,
                      const TrainingConfig& config);

struct Prediction {
  std::size_t index = 0;
  std::string label;
  double confidence = 0.0;
  Probabilities probs;
  bool all_padding = false;  // no token of the question is in the vocabulary
};

Prediction predict(const ModelParams& params, const Vocabulary& vocab, std::string_view question, Task task,
                   std::size_t maxlen);
Prediction predict(const SavedModel& model, std::string_view question);

/// Training config stored in a model file.
TrainingConfig config_of(const SavedModel& model);

}  // namespace bloom
