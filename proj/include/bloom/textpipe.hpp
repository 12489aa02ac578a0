#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bloom/corpus.hpp"

namespace bloom {

inline constexpr std::string_view kDefaultFilters = "!\"#$%&()*+,-./:;<=>?@[\\]^_`{|}~\t\n";

struct TokenizerConfig {
  std::size_t num_words = 5000;  // cap; indices 1..num_words-1 are handed out
  std::string filters{kDefaultFilters};
  bool lowercase = true;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

/// Lowercase (optional), replace filter characters with spaces, split on
/// whitespace.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

/// Frequency-ranked word index. Index 0 is the padding slot and is never
/// given to a word.
class Vocabulary {
 public:
  struct Entry {
    std::string word;
    std::int64_t count = 0;
  };

  Vocabulary() = default;
  Vocabulary(TokenizerConfig config, std::vector<Entry> ranked);

  const TokenizerConfig& config() const { return config_; }

  /// Every word seen while fitting, in rank order (most frequent first,
  /// ties by first appearance).
  const std::vector<Entry>& ranked() const { return ranked_; }

  /// 0 when the word is unknown or ranked past the cap.
  std::size_t index_of(std::string_view word) const;
  std::int64_t count_of(std::string_view word) const;

  /// Number of words holding an index (K <= num_words - 1).
  std::size_t indexed_words() const { return indexed_; }

  /// Rows needed in an embedding table: K + 1 (padding row included).
  std::size_t embedding_rows() const { return indexed_ + 1; }

  /// Text form: one `#bloom-vocab` config header then `word\tindex\tcount`
  /// per word in rank order (index 0 marks words beyond the cap).
  std::string serialize() const;
  static Vocabulary deserialize(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  /// FNV-1a over the serialized form.
  std::uint64_t hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.config_ == b.config_ && a.serialize() == b.serialize();
  }

 private:
  TokenizerConfig config_;
  std::vector<Entry> ranked_;
  std::unordered_map<std::string, std::size_t> position_;
  std::size_t indexed_ = 0;
};

Vocabulary fit_tokenizer(std::span<const std::string> texts, const TokenizerConfig& config);

using IndexSequence = std::vector<std::int32_t>;

/// Out-of-vocabulary and rank-capped tokens are dropped.
std::vector<IndexSequence> texts_to_sequences(const Vocabulary& vocab, std::span<const std::string> texts);
IndexSequence text_to_sequence(const Vocabulary& vocab, std::string_view text);

/// Row-major [rows x maxlen] index matrix; 0 is padding.
class SequenceMatrix {
 public:
  SequenceMatrix() = default;
  SequenceMatrix(std::size_t rows, std::size_t maxlen) : rows_(rows), cols_(maxlen), data_(rows * maxlen, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t maxlen() const { return cols_; }

  std::span<const std::int32_t> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<std::int32_t> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int32_t> data_;
};

/// Left-pads with 0; longer sequences keep their last `maxlen` entries.
SequenceMatrix pad_sequences(std::span<const IndexSequence> seqs, std::size_t maxlen);
IndexSequence pad_sequence(const IndexSequence& seq, std::size_t maxlen);

/// Full pipeline: tokenize, index, pad.
SequenceMatrix encode_texts(const Vocabulary& vocab, std::span<const std::string> texts, std::size_t maxlen);

using OneHotLabel = std::vector<double>;

OneHotLabel encode_label(CognitiveLabel label);
OneHotLabel encode_label(KnowledgeLabel label);
OneHotLabel encode_label(Task task, std::size_t class_index);

struct DecodedLabel {
  std::size_t index = 0;
  std::string_view name;
  double confidence = 0.0;
};

/// Argmax with lowest-index tie-break.
DecodedLabel decode_label(std::span<const double> probabilities, Task task);

}  // namespace bloom
