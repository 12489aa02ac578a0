#include "bloom/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bloom/error.hpp"
#include "bloom/text_util.hpp"

namespace bloom {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string rstrip(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

std::size_t arch_slot(Architecture a) { return a == Architecture::Cnn ? 0 : 1; }
std::size_t task_slot(Task t) { return t == Task::Cognitive ? 0 : 1; }

}  // namespace

ConfusionMatrix::ConfusionMatrix(Task task)
    : task_(task), classes_(num_classes(task)), counts_(classes_ * classes_, 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes_ || predicted >= classes_) throw std::out_of_range("confusion matrix class index");
  ++counts_[truth * classes_ + predicted];
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::int64_t ConfusionMatrix::diagonal() const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < classes_; ++i) s += at(i, i);
  return s;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::int64_t s = 0;
  for (std::size_t j = 0; j < classes_; ++j) s += at(truth, j);
  return s;
}

std::int64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < classes_; ++i) s += at(i, predicted);
  return s;
}

std::string ConfusionMatrix::render() const {
  constexpr std::size_t w = 12;
  std::string out = pad_right("true\\pred", w);
  for (std::size_t j = 0; j < classes_; ++j) out += pad_left(std::string(class_name(task_, j)), w);
  out += '\n';
  for (std::size_t i = 0; i < classes_; ++i) {
    out += pad_right(std::string(class_name(task_, i)), w);
    for (std::size_t j = 0; j < classes_; ++j) out += pad_left(std::to_string(at(i, j)), w);
    out += '\n';
  }
  return out;
}

Evaluation evaluate_probabilities(std::span<const Probabilities> probs, std::span<const std::size_t> labels, Task task) {
  if (probs.empty()) throw ValidationError("cannot evaluate on an empty dataset");
  const Score s = score_predictions(probs, labels, task);
  Evaluation ev{s.accuracy, s.loss, ConfusionMatrix(task)};
  for (std::size_t i = 0; i < probs.size(); ++i) ev.confusion.add(labels[i], decode_label(probs[i], task).index);
  return ev;
}

Evaluation evaluate(const ModelParams& params, const Vocabulary& vocab, const CorpusDataset& ds, Task task,
                    std::size_t maxlen) {
  if (ds.empty()) throw ValidationError("cannot evaluate on an empty dataset");
  const EncodedSet data = encode_dataset(ds, vocab, task, maxlen);
  const auto probs = kernels::predict_all_parallel(params, data.inputs);
  return evaluate_probabilities(probs, data.labels, task);
}

Evaluation evaluate(const SavedModel& model, const CorpusDataset& ds) {
  return evaluate(model.params, model.vocab, ds, model.task, config_of(model).maxlen);
}

std::string format_percent(double fraction) {
  std::string s = fixed(fraction * 100.0, 2);
  if (s.ends_with(".00")) s.resize(s.size() - 3);
  return s + "%";
}

ComparativeReport comparative_report(std::span<const TrainHistory> histories, EpochPick pick) {
  ComparativeReport report;
  for (const auto& h : histories) {
    if (h.epochs.empty()) throw ValidationError("history has no epochs");
    auto& cell = report.cells[arch_slot(h.config.architecture)][task_slot(h.config.task)];
    if (cell) {
      throw ValidationError("duplicate history for " + std::string(to_string(h.config.architecture)) + "/" +
                            std::string(to_string(h.config.task)));
    }
    const EpochMetrics* m = &h.epochs.back();
    if (pick == EpochPick::BestTest) {
      for (const auto& e : h.epochs) {
        if (e.test_accuracy > m->test_accuracy || (e.test_accuracy == m->test_accuracy && e.epoch < m->epoch)) m = &e;
      }
    }
    cell = ReportCell{m->train_accuracy, m->test_accuracy, m->train_loss, m->test_loss};
  }
  for (Architecture a : {Architecture::Cnn, Architecture::Lstm}) {
    const auto& row = report.cells[arch_slot(a)];
    if (row[0] || row[1]) report.rows.push_back(a);
  }
  return report;
}

std::string ComparativeReport::render_text() const {
  constexpr std::size_t first = 8;
  constexpr std::size_t w = 10;
  std::string out;
  out += rstrip(pad_right("Model", first) + pad_right("Cognitive Process", 4 * w) + "Knowledge Dimension") + '\n';
  out += rstrip(pad_right("", first) + pad_right("Accuracy", 2 * w) + pad_right("Loss", 2 * w) +
                pad_right("Accuracy", 2 * w) + "Loss") +
         '\n';
  std::string sub = pad_right("", first);
  for (int k = 0; k < 4; ++k) sub += pad_right("Training", w) + pad_right("Testing", w);
  out += rstrip(sub) + '\n';
  for (Architecture a : rows) {
    std::string line = pad_right(a == Architecture::Cnn ? "CNN" : "LSTM", first);
    for (const auto& cell : cells[arch_slot(a)]) {
      if (cell) {
        line += pad_right(format_percent(cell->train_accuracy), w) + pad_right(format_percent(cell->test_accuracy), w) +
                pad_right(fixed(cell->train_loss, 2), w) + pad_right(fixed(cell->test_loss, 2), w);
      } else {
        for (int k = 0; k < 4; ++k) line += pad_right("-", w);
      }
    }
    out += rstrip(line) + '\n';
  }
  return out;
}

std::string ComparativeReport::render_csv() const {
  std::string out =
      "model,cognitive_train_accuracy,cognitive_test_accuracy,cognitive_train_loss,cognitive_test_loss,"
      "knowledge_train_accuracy,knowledge_test_accuracy,knowledge_train_loss,knowledge_test_loss\n";
  for (Architecture a : rows) {
    out += a == Architecture::Cnn ? "CNN" : "LSTM";
    for (const auto& cell : cells[arch_slot(a)]) {
      if (cell) {
        for (double v : {cell->train_accuracy, cell->test_accuracy, cell->train_loss, cell->test_loss}) {
          out += ',' + fixed(v, 6);
        }
      } else {
        out += ",,,,";
      }
    }
    out += '\n';
  }
  return out;
}

std::string render_curves(const TrainHistory& history) {
  std::string out(kCurveHeader);
  out += '\n';
  for (const auto& e : history.epochs) {
    out += std::to_string(e.epoch) + ',' + fixed(e.train_accuracy, 6) + ',' + fixed(e.train_loss, 6) + ',' +
           fixed(e.test_accuracy, 6) + ',' + fixed(e.test_loss, 6) + '\n';
  }
  return out;
}

void export_curves(const TrainHistory& history, const std::filesystem::path& path) {
  if (history.epochs.empty()) throw ValidationError("cannot export an empty history");
  write_text_file(path, render_curves(history));
}

std::vector<EpochMetrics> parse_curves(std::string_view text) {
  std::vector<EpochMetrics> out;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kCurveHeader) throw ValidationError("curve file: bad header '" + std::string(line) + "'");
      header_seen = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 5) throw ValidationError("curve file line " + std::to_string(line_no) + ": expected 5 columns");
    EpochMetrics m;
    m.epoch = static_cast<std::size_t>(parse_double(cols[0]));
    m.train_accuracy = parse_double(cols[1]);
    m.train_loss = parse_double(cols[2]);
    m.test_accuracy = parse_double(cols[3]);
    m.test_loss = parse_double(cols[4]);
    out.push_back(m);
  }
  if (!header_seen) throw ValidationError("curve file: missing header");
  return out;
}

std::string render_history(const TrainHistory& history) {
  std::string out;
  for (const auto& [k, v] : history.config.to_key_values()) out += "# " + k + '=' + v + '\n';
  return out + render_curves(history);
}

void write_history(const TrainHistory& history, const std::filesystem::path& path) {
  if (history.epochs.empty()) throw ValidationError("cannot write an empty history");
  write_text_file(path, render_history(history));
}

TrainHistory parse_history(std::string_view text) {
  KeyValues kv;
  for (const auto& raw : split(text, '\n')) {
    const std::string_view line = trim(raw);
    if (!line.starts_with('#')) continue;
    const std::string_view body = trim(line.substr(1));
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;
    kv.emplace_back(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
  const auto has = [&](std::string_view key) {
    return std::any_of(kv.begin(), kv.end(), [&](const auto& p) { return p.first == key; });
  };
  if (!has("architecture") || !has("task")) {
    throw ValidationError("history file lacks '# architecture=' / '# task=' lines (write it with train --history-out)");
  }
  TrainHistory h;
  h.config = TrainingConfig::from_key_values(kv);
  h.epochs = parse_curves(text);
  return h;
}

TrainHistory read_history(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return parse_history(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace bloom
