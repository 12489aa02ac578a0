#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bloom/corpus.hpp"
#include "bloom/model.hpp"
#include "bloom/textpipe.hpp"
#include "bloom/train.hpp"

namespace bloom {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(Task task);

  void add(std::size_t truth, std::size_t predicted);

  Task task() const { return task_; }
  std::size_t classes() const { return classes_; }
  std::int64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * classes_ + predicted]; }
  std::int64_t total() const;
  std::int64_t diagonal() const;
  std::int64_t row_sum(std::size_t truth) const;
  std::int64_t column_sum(std::size_t predicted) const;

  /// Fixed-width table with class names on both axes.
  std::string render() const;

 private:
  Task task_;
  std::size_t classes_;
  std::vector<std::int64_t> counts_;
};

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
  ConfusionMatrix confusion;
};

/// Infer-mode accuracy, mean cross-entropy, and confusion matrix over `ds`.
/// Throws ValidationError for an empty dataset.
Evaluation evaluate(const ModelParams& params, const Vocabulary& vocab, const CorpusDataset& ds, Task task,
                    std::size_t maxlen);
Evaluation evaluate(const SavedModel& model, const CorpusDataset& ds);

/// Same as evaluate, but from already computed probabilities.
Evaluation evaluate_probabilities(std::span<const Probabilities> probs, std::span<const std::size_t> labels, Task task);

// ---- comparative report --------------------------------------------------------

struct ReportCell {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double train_loss = 0.0;
  double test_loss = 0.0;
};

/// Architecture rows by task column groups; missing cells render as "-".
struct ComparativeReport {
  // [architecture][task]
  std::array<std::array<std::optional<ReportCell>, 2>, 2> cells{};
  std::vector<Architecture> rows;  // architectures present, CNN before LSTM

  std::string render_text() const;
  std::string render_csv() const;
};

enum class EpochPick { Final, BestTest };

/// Throws ValidationError when two histories share an (architecture, task)
/// cell or a history is empty.
ComparativeReport comparative_report(std::span<const TrainHistory> histories, EpochPick pick = EpochPick::Final);

/// Percent with two decimals, dropping a ".00" tail: 0.75 -> "75%", 0.8889 -> "88.89%".
std::string format_percent(double fraction);

// ---- curves and history files ---------------------------------------------------

inline constexpr std::string_view kCurveHeader = "epoch,train_accuracy,train_loss,test_accuracy,test_loss";

std::string render_curves(const TrainHistory& history);
void export_curves(const TrainHistory& history, const std::filesystem::path& path);

/// Parses a curve CSV (lines starting with '#' are skipped).
std::vector<EpochMetrics> parse_curves(std::string_view text);

/// History file: `# key=value` lines for the config snapshot, then the
/// curve CSV.
std::string render_history(const TrainHistory& history);
void write_history(const TrainHistory& history, const std::filesystem::path& path);
TrainHistory parse_history(std::string_view text);
TrainHistory read_history(const std::filesystem::path& path);

}  // namespace bloom
