#include "bloom/train.hpp"

#include <cmath>
#include <numeric>

#include "bloom/error.hpp"
#include "bloom/text_util.hpp"

namespace bloom {

namespace {

void glorot(NumArray& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : w.data()) v = rng.uniform(-limit, limit);
}

void uniform_fill(NumArray& w, double lo, double hi, Rng& rng) {
  for (auto& v : w.data()) v = rng.uniform(lo, hi);
}

constexpr std::uint64_t kInitStream = 0x1417ULL;
constexpr std::uint64_t kShuffleStream = 0x5f1eULL;

}  // namespace

ModelParams init_params(const TrainingConfig& config, std::size_t vocab_size) {
  config.validate();
  if (vocab_size < 2) throw ValidationError("vocabulary must hold at least one word besides padding");
  Rng rng(mix_seed(config.seed, kInitStream));
  const std::size_t classes = num_classes(config.task);
  const std::size_t emb = config.emb_dim;

  if (config.architecture == Architecture::Cnn) {
    CnnParams p;
    p.output = config.cnn_output;
    p.embedding = NumArray({vocab_size, emb});
    p.kernels = NumArray({config.num_filters, config.kernel_width, emb});
    p.conv_bias = NumArray({config.num_filters});
    p.out_weights = NumArray({config.num_filters, classes});
    p.out_bias = NumArray({classes});
    uniform_fill(p.embedding, -0.05, 0.05, rng);
    glorot(p.kernels, config.kernel_width * emb, config.kernel_width * config.num_filters, rng);
    glorot(p.out_weights, config.num_filters, classes, rng);
    return p;
  }

  const std::size_t units = config.lstm_units;
  LstmParams p;
  p.embedding = NumArray({vocab_size, emb});
  p.input = NumArray({4, units, emb});
  p.recurrent = NumArray({4, units, units});
  p.bias = NumArray({4, units});
  p.out_weights = NumArray({units, classes});
  p.out_bias = NumArray({classes});
  uniform_fill(p.embedding, -0.05, 0.05, rng);
  glorot(p.input, emb, 4 * units, rng);
  glorot(p.recurrent, units, 4 * units, rng);
  for (std::size_t u = 0; u < units; ++u) p.bias(nn::kForgetGate, u) = 1.0;
  glorot(p.out_weights, units, classes, rng);
  return p;
}

OptimizerState make_optimizer_state(const ModelParams& params) {
  return {0, zeros_like(params), zeros_like(params)};
}

void optimizer_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, const TrainingConfig& config) {
  if (!same_shapes(params, grads)) throw std::invalid_argument("optimizer_step: gradient shapes differ from params");
  for_each_tensor(grads, [](std::string_view name, const NumArray& g) {
    if (!g.all_finite()) throw NumericError("non-finite gradient in tensor '" + std::string(name) + "'");
  });

  const double lr = config.learning_rate;
  if (config.optimizer == OptimizerKind::Sgd) {
    for_each_tensor_pair(params, grads, [&](std::string_view, NumArray& p, const NumArray& g) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    });
    ++state.step;
    return;
  }

  if (state.first_moment.index() != params.index() || !same_shapes(state.first_moment, params)) {
    state = make_optimizer_state(params);
  }
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);

  std::vector<NumArray*> m;
  std::vector<NumArray*> v;
  for_each_tensor(state.first_moment, [&](std::string_view, NumArray& a) { m.push_back(&a); });
  for_each_tensor(state.second_moment, [&](std::string_view, NumArray& a) { v.push_back(&a); });
  std::size_t k = 0;
  for_each_tensor_pair(params, grads, [&](std::string_view, NumArray& p, const NumArray& g) {
    NumArray& mk = *m[k];
    NumArray& vk = *v[k];
    ++k;
    for (std::size_t i = 0; i < p.size(); ++i) {
      mk[i] = b1 * mk[i] + (1.0 - b1) * g[i];
      vk[i] = b2 * vk[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = mk[i] / correction1;
      const double v_hat = vk[i] / correction2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
  });
}

EncodedSet encode_dataset(const CorpusDataset& ds, const Vocabulary& vocab, Task task, std::size_t maxlen) {
  std::vector<std::string> texts;
  texts.reserve(ds.size());
  EncodedSet out;
  out.task = task;
  for (const auto& r : ds.records) {
    texts.push_back(r.text);
    out.labels.push_back(r.label_index(task));
  }
  out.inputs = encode_texts(vocab, texts, maxlen);
  return out;
}

Score score_predictions(std::span<const Probabilities> probs, std::span<const std::size_t> labels, Task task) {
  if (probs.size() != labels.size()) throw std::invalid_argument("score_predictions: size mismatch");
  if (probs.empty()) throw ValidationError("cannot score an empty dataset");
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (decode_label(probs[i], task).index == labels[i]) ++correct;
    loss += nn::cross_entropy(encode_label(task, labels[i]), probs[i]);
  }
  const auto n = static_cast<double>(probs.size());
  return {static_cast<double>(correct) / n, loss / n};
}

FitResult fit_encoded(const EncodedSet& train, const EncodedSet& test, const Vocabulary& vocab,
                      const TrainingConfig& config) {
  config.validate();
  if (train.size() == 0) throw ValidationError("training split is empty");
  if (test.size() == 0) throw ValidationError("test split is empty");
  if (train.task != config.task || test.task != config.task) {
    throw ValidationError("encoded data task does not match the training config");
  }

  ModelParams params = init_params(config, vocab.embedding_rows());
  OptimizerState state = make_optimizer_state(params);
  const DropoutConfig dropout = config.dropout();

  FitResult result;
  result.history.config = config;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream, epoch));
    shuffle_rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      auto bg = kernels::batch_gradient_parallel(params, train, batch, dropout, nn::Mode::Train, config.seed, epoch);
      if (!std::isfinite(bg.loss_sum)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      const double scale = 1.0 / static_cast<double>(len);
      for_each_tensor(bg.grad_sum, [&](std::string_view, NumArray& g) {
        for (auto& x : g.data()) x *= scale;
      });
      optimizer_step(params, bg.grad_sum, state, config);
    }

    const auto train_probs = kernels::predict_all_parallel(params, train.inputs);
    const auto test_probs = kernels::predict_all_parallel(params, test.inputs);
    const Score tr = score_predictions(train_probs, train.labels, config.task);
    const Score te = score_predictions(test_probs, test.labels, config.task);
    result.history.epochs.push_back({epoch, tr.accuracy, tr.loss, te.accuracy, te.loss});
  }

  result.model.params = std::move(params);
  result.model.task = config.task;
  result.model.vocab = vocab;
  result.model.config = config.to_key_values();
  return result;
}

FitResult fit(const CorpusDataset& train_ds, const CorpusDataset& test_ds, const TrainingConfig& config) {
  config.validate();
  if (train_ds.empty()) throw ValidationError("training split is empty");
  if (test_ds.empty()) throw ValidationError("test split is empty");
  std::vector<std::string> texts;
  for (const auto& r : train_ds.records) texts.push_back(r.text);
  if (config.fit_on_all) {
    for (const auto& r : test_ds.records) texts.push_back(r.text);
  }
  const Vocabulary vocab = fit_tokenizer(texts, config.tokenizer());
  if (vocab.indexed_words() == 0) throw ValidationError("training questions contain no tokens");
  const EncodedSet train = encode_dataset(train_ds, vocab, config.task, config.maxlen);
  const EncodedSet test = encode_dataset(test_ds, vocab, config.task, config.maxlen);
  return fit_encoded(train, test, vocab, config);
}

Prediction predict(const ModelParams& params, const Vocabulary& vocab, std::string_view question, Task task,
                   std::size_t maxlen) {
  if (trim(question).empty()) throw ValidationError("empty question");
  const IndexSequence seq = text_to_sequence(vocab, question);
  const IndexSequence padded = pad_sequence(seq, maxlen);
  Rng unused(0);
  Prediction p;
  p.probs = model_forward(params, padded, {}, nn::Mode::Infer, unused);
  const auto decoded = decode_label(p.probs, task);
  p.index = decoded.index;
  p.label = std::string(decoded.name);
  p.confidence = decoded.confidence;
  p.all_padding = seq.empty();
  return p;
}

TrainingConfig config_of(const SavedModel& model) { return TrainingConfig::from_key_values(model.config); }

Prediction predict(const SavedModel& model, std::string_view question) {
  return predict(model.params, model.vocab, question, model.task, config_of(model).maxlen);
}

}  // namespace bloom
