#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bloom {

// Canonical indices follow the one-hot tables used for training targets.
enum class CognitiveLabel : int { Remember = 0, Understand, Apply, Evaluate, Analyze, Create };
enum class KnowledgeLabel : int { Factual = 0, Conceptual, Procedural };

inline constexpr std::size_t kNumCognitive = 6;
inline constexpr std::size_t kNumKnowledge = 3;

/// Which label axis a model predicts.
enum class Task { Cognitive, Knowledge };

std::size_t num_classes(Task task);
std::string_view to_string(Task task);
Task parse_task(std::string_view s);

std::string_view to_string(CognitiveLabel label);
std::string_view to_string(KnowledgeLabel label);
/// Case-insensitive; nullopt for anything outside the label set.
std::optional<CognitiveLabel> parse_cognitive(std::string_view s);
std::optional<KnowledgeLabel> parse_knowledge(std::string_view s);

inline constexpr std::array<CognitiveLabel, kNumCognitive> kAllCognitive = {
    CognitiveLabel::Remember, CognitiveLabel::Understand, CognitiveLabel::Apply,
    CognitiveLabel::Evaluate, CognitiveLabel::Analyze,    CognitiveLabel::Create};
inline constexpr std::array<KnowledgeLabel, kNumKnowledge> kAllKnowledge = {
    KnowledgeLabel::Factual, KnowledgeLabel::Conceptual, KnowledgeLabel::Procedural};

/// Class display name for index `index` of `task`.
std::string_view class_name(Task task, std::size_t index);

struct QuestionRecord {
  std::string text;
  CognitiveLabel cognitive = CognitiveLabel::Remember;
  KnowledgeLabel knowledge = KnowledgeLabel::Factual;

  /// Class index of this record on the given label axis.
  std::size_t label_index(Task task) const {
    return task == Task::Cognitive ? static_cast<std::size_t>(cognitive)
                                   : static_cast<std::size_t>(knowledge);
  }

  friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

struct CorpusDataset {
  std::vector<QuestionRecord> records;
  std::string source;  // file path or "synthetic:seed=N"

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct DistributionTable {
  std::array<std::int64_t, kNumCognitive> cognitive{};
  std::array<std::int64_t, kNumKnowledge> knowledge{};
  std::int64_t total = 0;

  friend bool operator==(const DistributionTable&, const DistributionTable&) = default;
};

/// The published marginals of the 844-question Software Engineering corpus.
DistributionTable table1_distribution();

enum class CorpusFormat { Csv, Jsonl };

/// Picks the format from the extension (.jsonl / .json -> Jsonl, else Csv).
CorpusFormat format_from_path(const std::filesystem::path& path);

/// Throws IoError when the file cannot be read, ValidationError on any
/// schema, label, or encoding problem (messages carry the row number).
CorpusDataset parse_corpus(const std::filesystem::path& path, CorpusFormat format);
CorpusDataset parse_corpus_text(std::string_view content, CorpusFormat format,
                                std::string source = "<memory>");

std::string serialize_corpus(const CorpusDataset& ds, CorpusFormat format);
void write_corpus(const CorpusDataset& ds, const std::filesystem::path& path, CorpusFormat format);

DistributionTable class_distribution(const CorpusDataset& ds);

/// Stratified random split. Train size is round(N * ratio); each class gets
/// floor(count * ratio) train records plus one more for the classes with
/// the largest fractional parts. Records keep their original relative order.
std::pair<CorpusDataset, CorpusDataset> split_train_test(const CorpusDataset& ds, double train_ratio,
                                                         std::uint64_t seed, Task stratify_by);

/// Builds a verb-templated question corpus whose class_distribution equals
/// `dist` exactly. Deterministic in (dist, seed).
CorpusDataset generate_synthetic_corpus(const DistributionTable& dist, std::uint64_t seed);

/// Joint cognitive x knowledge cell counts honoring both marginals.
/// Exposed for testing the allocation separately from text generation.
std::array<std::array<std::int64_t, kNumKnowledge>, kNumCognitive> allocate_joint_counts(
    const DistributionTable& dist, std::uint64_t seed);

}  // namespace bloom
