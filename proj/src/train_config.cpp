#include <charconv>
#include <cmath>

#include "bloom/error.hpp"
#include "bloom/text_util.hpp"
#include "bloom/train.hpp"

namespace bloom {

namespace {

std::size_t parse_size(std::string_view key, std::string_view value) {
  value = trim(value);
  std::size_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ValidationError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                          std::string(value) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  value = trim(value);
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ValidationError("config key '" + std::string(key) + "': expected an unsigned integer, got '" +
                          std::string(value) + "'");
  }
  return v;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    return parse_double(value);
  } catch (const ValidationError&) {
    throw ValidationError("config key '" + std::string(key) + "': expected a number, got '" + std::string(value) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = ascii_lower(trim(value));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ValidationError("config key '" + std::string(key) + "': expected true or false, got '" + std::string(value) +
                        "'");
}

void check_rate(std::string_view key, double v) {
  if (!(v >= 0.0 && v < 1.0)) {
    throw ValidationError("config key '" + std::string(key) + "' must lie in [0, 1), got " + format_double(v));
  }
}

}  // namespace

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "adam") return OptimizerKind::Adam;
  if (v == "sgd") return OptimizerKind::Sgd;
  throw ValidationError("unknown optimizer '" + std::string(s) + "' (expected adam or sgd)");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"task", "label axis to predict: cognitive | knowledge"},
      {"architecture", "model: cnn | lstm"},
      {"epochs", "passes over the training split (>= 1)"},
      {"batch_size", "samples per optimizer step (>= 1)"},
      {"learning_rate", "optimizer step size (> 0)"},
      {"optimizer", "adam | sgd"},
      {"adam_beta1", "adam first-moment decay"},
      {"adam_beta2", "adam second-moment decay"},
      {"adam_epsilon", "adam denominator epsilon"},
      {"spatial_dropout", "channel dropout after the embedding, in [0,1)"},
      {"lstm_dropout", "lstm input dropout, in [0,1)"},
      {"recurrent_dropout", "lstm recurrent dropout, in [0,1)"},
      {"emb_dim", "embedding width"},
      {"num_words", "vocabulary cap; indices 1..num_words-1"},
      {"maxlen", "padded sequence length"},
      {"kernel_width", "cnn convolution width"},
      {"num_filters", "cnn filter count"},
      {"lstm_units", "lstm memory units"},
      {"cnn_output", "cnn output normalization: softmax | sigmoid"},
      {"fit_on_all", "fit the vocabulary on train+test instead of train only"},
      {"seed", "seed for initialization, shuffling, and dropout"},
  };
  return keys;
}

void TrainingConfig::set(std::string_view key, std::string_view value) {
  if (key == "task") task = parse_task(value);
  else if (key == "architecture") architecture = parse_architecture(value);
  else if (key == "epochs") epochs = parse_size(key, value);
  else if (key == "batch_size") batch_size = parse_size(key, value);
  else if (key == "learning_rate") learning_rate = parse_real(key, value);
  else if (key == "optimizer") optimizer = parse_optimizer(value);
  else if (key == "adam_beta1") adam_beta1 = parse_real(key, value);
  else if (key == "adam_beta2") adam_beta2 = parse_real(key, value);
  else if (key == "adam_epsilon") adam_epsilon = parse_real(key, value);
  else if (key == "spatial_dropout") spatial_dropout = parse_real(key, value);
  else if (key == "lstm_dropout") lstm_dropout = parse_real(key, value);
  else if (key == "recurrent_dropout") recurrent_dropout = parse_real(key, value);
  else if (key == "emb_dim") emb_dim = parse_size(key, value);
  else if (key == "num_words") num_words = parse_size(key, value);
  else if (key == "maxlen") maxlen = parse_size(key, value);
  else if (key == "kernel_width") kernel_width = parse_size(key, value);
  else if (key == "num_filters") num_filters = parse_size(key, value);
  else if (key == "lstm_units") lstm_units = parse_size(key, value);
  else if (key == "cnn_output") cnn_output = parse_output_activation(value);
  else if (key == "fit_on_all") fit_on_all = parse_bool(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else throw ValidationError("unknown config key '" + std::string(key) + "'");
}

void TrainingConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be a positive finite number");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ValidationError("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ValidationError("adam_beta2 must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be positive");
  check_rate("spatial_dropout", spatial_dropout);
  check_rate("lstm_dropout", lstm_dropout);
  check_rate("recurrent_dropout", recurrent_dropout);
  if (emb_dim < 1) throw ValidationError("emb_dim must be at least 1");
  if (num_words < 2) throw ValidationError("num_words must be at least 2");
  if (maxlen < 1) throw ValidationError("maxlen must be at least 1");
  if (architecture == Architecture::Cnn) {
    if (kernel_width < 1) throw ValidationError("kernel_width must be at least 1");
    if (num_filters < 1) throw ValidationError("num_filters must be at least 1");
    if (maxlen < kernel_width) {
      throw ValidationError("maxlen (" + std::to_string(maxlen) + ") is shorter than kernel_width (" +
                            std::to_string(kernel_width) + ")");
    }
  } else if (lstm_units < 1) {
    throw ValidationError("lstm_units must be at least 1");
  }
}

KeyValues TrainingConfig::to_key_values() const {
  return {
      {"task", std::string(to_string(task))},
      {"architecture", std::string(to_string(architecture))},
      {"epochs", std::to_string(epochs)},
      {"batch_size", std::to_string(batch_size)},
      {"learning_rate", format_double(learning_rate)},
      {"optimizer", std::string(to_string(optimizer))},
      {"adam_beta1", format_double(adam_beta1)},
      {"adam_beta2", format_double(adam_beta2)},
      {"adam_epsilon", format_double(adam_epsilon)},
      {"spatial_dropout", format_double(spatial_dropout)},
      {"lstm_dropout", format_double(lstm_dropout)},
      {"recurrent_dropout", format_double(recurrent_dropout)},
      {"emb_dim", std::to_string(emb_dim)},
      {"num_words", std::to_string(num_words)},
      {"maxlen", std::to_string(maxlen)},
      {"kernel_width", std::to_string(kernel_width)},
      {"num_filters", std::to_string(num_filters)},
      {"lstm_units", std::to_string(lstm_units)},
      {"cnn_output", std::string(to_string(cnn_output))},
      {"fit_on_all", fit_on_all ? "true" : "false"},
      {"seed", std::to_string(seed)},
  };
}

TrainingConfig TrainingConfig::from_key_values(const KeyValues& kv) {
  TrainingConfig c;
  for (const auto& [k, v] : kv) c.set(k, v);
  return c;
}

TrainingConfig TrainingConfig::parse(std::string_view text, TrainingConfig base) {
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

TrainingConfig TrainingConfig::load(const std::filesystem::path& path, TrainingConfig base) {
  const auto text = read_text_file(path);
  try {
    return parse(text, std::move(base));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

TrainingConfig TrainingConfig::parse(std::string_view text) { return parse(text, TrainingConfig{}); }

TrainingConfig TrainingConfig::load(const std::filesystem::path& path) { return load(path, TrainingConfig{}); }

TokenizerConfig TrainingConfig::tokenizer() const {
  TokenizerConfig t;
  t.num_words = num_words;
  return t;
}

}  // namespace bloom
