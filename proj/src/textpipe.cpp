#include "bloom/textpipe.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include "bloom/error.hpp"
#include "bloom/text_util.hpp"

namespace bloom {

namespace {

constexpr std::string_view kVocabMagic = "#bloom-vocab v1";

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string to_hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xF]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ValidationError("vocabulary header: odd-length hex string");
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    unsigned v = 0;
    const auto res = std::from_chars(hex.data() + i, hex.data() + i + 2, v, 16);
    if (res.ec != std::errc{} || res.ptr != hex.data() + i + 2) {
      throw ValidationError("vocabulary header: bad hex string");
    }
    out.push_back(static_cast<char>(v));
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::array<bool, 256> is_filter{};
  for (unsigned char c : config.filters) is_filter[c] = true;

  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (config.lowercase && c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if (is_filter[c] || is_space(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary(TokenizerConfig config, std::vector<Entry> ranked)
    : config_(std::move(config)), ranked_(std::move(ranked)) {
  if (config_.num_words < 2) throw ValidationError("num_words must be at least 2");
  position_.reserve(ranked_.size());
  for (std::size_t i = 0; i < ranked_.size(); ++i) {
    if (!position_.emplace(ranked_[i].word, i).second) {
      throw ValidationError("duplicate vocabulary word '" + ranked_[i].word + "'");
    }
    if (i > 0 && ranked_[i].count > ranked_[i - 1].count) {
      throw ValidationError("vocabulary not in rank order at word '" + ranked_[i].word + "'");
    }
  }
  indexed_ = std::min(ranked_.size(), config_.num_words - 1);
}

std::size_t Vocabulary::index_of(std::string_view word) const {
  const auto it = position_.find(std::string(word));
  if (it == position_.end() || it->second >= indexed_) return 0;
  return it->second + 1;
}

std::int64_t Vocabulary::count_of(std::string_view word) const {
  const auto it = position_.find(std::string(word));
  return it == position_.end() ? 0 : ranked_[it->second].count;
}

std::string Vocabulary::serialize() const {
  std::string out(kVocabMagic);
  out += " num_words=" + std::to_string(config_.num_words);
  out += " lowercase=" + std::string(config_.lowercase ? "1" : "0");
  out += " filters_hex=" + to_hex(config_.filters);
  out += " words=" + std::to_string(ranked_.size());
  out += '\n';
  for (std::size_t i = 0; i < ranked_.size(); ++i) {
    out += ranked_[i].word;
    out += '\t';
    out += std::to_string(i < indexed_ ? i + 1 : 0);
    out += '\t';
    out += std::to_string(ranked_[i].count);
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  const auto lines = split(text, '\n');
  if (lines.empty() || !lines[0].starts_with(kVocabMagic)) {
    throw ValidationError("not a vocabulary file (missing '" + std::string(kVocabMagic) + "' header)");
  }
  TokenizerConfig config;
  std::size_t declared = 0;
  bool have_words = false;
  for (const auto& field : split(trim(std::string_view(lines[0]).substr(kVocabMagic.size())), ' ')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ValidationError("vocabulary header: malformed field '" + field + "'");
    const std::string_view key(field.data(), eq);
    const std::string_view value(field.data() + eq + 1, field.size() - eq - 1);
    if (key == "num_words") config.num_words = parse_int<std::size_t>(value, "num_words");
    else if (key == "lowercase") config.lowercase = value == "1";
    else if (key == "filters_hex") config.filters = from_hex(value);
    else if (key == "words") {
      declared = parse_int<std::size_t>(value, "word count");
      have_words = true;
    } else {
      throw ValidationError("vocabulary header: unknown key '" + std::string(key) + "'");
    }
  }
  std::vector<Entry> ranked;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (lines[l].empty()) continue;
    const auto cols = split(lines[l], '\t');
    if (cols.size() != 3) throw ValidationError("vocabulary line " + std::to_string(l + 1) + ": expected 3 columns");
    const auto index = parse_int<std::size_t>(cols[1], "index");
    const std::size_t expected_index = ranked.size() + 1 < config.num_words ? ranked.size() + 1 : 0;
    if (index != expected_index) {
      throw ValidationError("vocabulary line " + std::to_string(l + 1) + ": index " + std::to_string(index) +
                            " out of sequence (expected " + std::to_string(expected_index) + ")");
    }
    ranked.push_back({cols[0], parse_int<std::int64_t>(cols[2], "count")});
  }
  if (have_words && declared != ranked.size()) {
    throw ValidationError("vocabulary truncated: header declares " + std::to_string(declared) + " words, found " +
                          std::to_string(ranked.size()));
  }
  return Vocabulary(std::move(config), std::move(ranked));
}

void Vocabulary::save(const std::filesystem::path& path) const { write_text_file(path, serialize()); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) { return deserialize(read_text_file(path)); }

std::uint64_t Vocabulary::hash() const { return fnv1a64(serialize()); }

Vocabulary fit_tokenizer(std::span<const std::string> texts, const TokenizerConfig& config) {
  if (texts.empty()) throw ValidationError("cannot fit a tokenizer on an empty text list");
  if (config.num_words < 2) throw ValidationError("num_words must be at least 2");

  std::vector<Vocabulary::Entry> entries;  // first-appearance order
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& text : texts) {
    for (auto& tok : tokenize(text, config)) {
      const auto [it, inserted] = slot.try_emplace(tok, entries.size());
      if (inserted) entries.push_back({std::move(tok), 0});
      ++entries[it->second].count;
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Vocabulary::Entry& a, const Vocabulary::Entry& b) { return a.count > b.count; });
  return Vocabulary(config, std::move(entries));
}

IndexSequence text_to_sequence(const Vocabulary& vocab, std::string_view text) {
  IndexSequence seq;
  for (const auto& tok : tokenize(text, vocab.config())) {
    if (const auto idx = vocab.index_of(tok); idx != 0) seq.push_back(static_cast<std::int32_t>(idx));
  }
  return seq;
}

std::vector<IndexSequence> texts_to_sequences(const Vocabulary& vocab, std::span<const std::string> texts) {
  std::vector<IndexSequence> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(text_to_sequence(vocab, t));
  return out;
}

IndexSequence pad_sequence(const IndexSequence& seq, std::size_t maxlen) {
  if (maxlen == 0) throw ValidationError("maxlen must be at least 1");
  IndexSequence out(maxlen, 0);
  const std::size_t keep = std::min(seq.size(), maxlen);
  std::copy(seq.end() - static_cast<std::ptrdiff_t>(keep), seq.end(), out.end() - static_cast<std::ptrdiff_t>(keep));
  return out;
}

SequenceMatrix pad_sequences(std::span<const IndexSequence> seqs, std::size_t maxlen) {
  if (maxlen == 0) throw ValidationError("maxlen must be at least 1");
  SequenceMatrix m(seqs.size(), maxlen);
  for (std::size_t r = 0; r < seqs.size(); ++r) {
    const auto padded = pad_sequence(seqs[r], maxlen);
    std::copy(padded.begin(), padded.end(), m.row(r).begin());
  }
  return m;
}

SequenceMatrix encode_texts(const Vocabulary& vocab, std::span<const std::string> texts, std::size_t maxlen) {
  const auto seqs = texts_to_sequences(vocab, texts);
  return pad_sequences(seqs, maxlen);
}

OneHotLabel encode_label(Task task, std::size_t class_index) {
  OneHotLabel v(num_classes(task), 0.0);
  v.at(class_index) = 1.0;
  return v;
}

OneHotLabel encode_label(CognitiveLabel label) {
  return encode_label(Task::Cognitive, static_cast<std::size_t>(label));
}

OneHotLabel encode_label(KnowledgeLabel label) {
  return encode_label(Task::Knowledge, static_cast<std::size_t>(label));
}

DecodedLabel decode_label(std::span<const double> probabilities, Task task) {
  const std::size_t c = num_classes(task);
  if (probabilities.size() != c) {
    throw ValidationError("probability vector has length " + std::to_string(probabilities.size()) + ", task " +
                          std::string(to_string(task)) + " needs " + std::to_string(c));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < c; ++i) {
    if (probabilities[i] > probabilities[best]) best = i;
  }
  return {best, class_name(task, best), probabilities[best]};
}

}  // namespace bloom
