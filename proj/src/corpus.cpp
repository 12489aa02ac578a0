#include "bloom/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "bloom/error.hpp"
#include "bloom/rng.hpp"
#include "bloom/text_util.hpp"

namespace bloom {

namespace {

constexpr std::array<std::string_view, kNumCognitive> kCognitiveNames = {
    "Remember", "Understand", "Apply", "Evaluate", "Analyze", "Create"};
constexpr std::array<std::string_view, kNumKnowledge> kKnowledgeNames = {"Factual", "Conceptual",
                                                                         "Procedural"};

template <std::size_t N>
std::optional<std::size_t> find_name(const std::array<std::string_view, N>& names, std::string_view s) {
  const std::string needle = ascii_lower(trim(s));
  for (std::size_t i = 0; i < N; ++i) {
    if (ascii_lower(names[i]) == needle) return i;
  }
  return std::nullopt;
}

// Typographic double quotes, accepted as an alternate quote pair in CSV
// (text pasted from word processors).
constexpr std::string_view kOpenCurly = "\xE2\x80\x9C";
constexpr std::string_view kCloseCurly = "\xE2\x80\x9D";

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC-4180 reader: comma separated, `"` quoting with `""` escapes, LF or
// CRLF row terminators, quoted fields may span lines.
std::vector<CsvRow> read_csv_rows(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t pos = 0;
  std::size_t line = 1;
  const std::size_t n = text.size();
  while (pos < n) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool row_done = false;
    while (!row_done) {
      field.clear();
      if (pos < n && text[pos] == '"') {
        ++pos;
        bool closed = false;
        while (pos < n) {
          const char c = text[pos];
          if (c == '"') {
            if (pos + 1 < n && text[pos + 1] == '"') {
              field.push_back('"');
              pos += 2;
              continue;
            }
            ++pos;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++pos;
        }
        if (!closed) {
          throw ValidationError("line " + std::to_string(row.line) + ": unterminated quoted field");
        }
        if (pos < n && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r') {
          throw ValidationError("line " + std::to_string(line) + ": unexpected character after closing quote");
        }
      } else if (text.substr(pos).starts_with(kOpenCurly)) {
        const std::size_t start = pos + kOpenCurly.size();
        std::size_t close = text.find(kCloseCurly, start);
        while (close != std::string_view::npos) {
          const std::size_t after = close + kCloseCurly.size();
          if (after >= n || text[after] == ',' || text[after] == '\n' || text[after] == '\r') break;
          close = text.find(kCloseCurly, after);
        }
        if (close == std::string_view::npos) {
          // No matching close quote: read it as a plain field.
          while (pos < n && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r') field.push_back(text[pos++]);
        } else {
          field.assign(text.substr(start, close - start));
          line += static_cast<std::size_t>(std::count(field.begin(), field.end(), '\n'));
          pos = close + kCloseCurly.size();
        }
      } else {
        while (pos < n && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r') {
          if (text[pos] == '"') {
            throw ValidationError("line " + std::to_string(line) + ": stray quote inside unquoted field");
          }
          field.push_back(text[pos++]);
        }
      }
      row.fields.push_back(field);
      if (pos >= n) {
        row_done = true;
      } else if (text[pos] == ',') {
        ++pos;
      } else {
        if (text[pos] == '\r') ++pos;
        if (pos < n && text[pos] == '\n') ++pos;
        ++line;
        row_done = true;
      }
    }
    // A blank line yields a single empty field; skip it.
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

QuestionRecord make_record(std::string_view question, std::string_view cognitive, std::string_view knowledge,
                           std::size_t line) {
  const std::string where = "line " + std::to_string(line) + ": ";
  QuestionRecord rec;
  const std::string_view text = trim(question);
  if (text.empty()) throw ValidationError(where + "empty question text");
  rec.text = std::string(text);
  const auto cog = parse_cognitive(cognitive);
  if (!cog) throw ValidationError(where + "unknown label '" + std::string(cognitive) + "' in column cognitive");
  const auto know = parse_knowledge(knowledge);
  if (!know) throw ValidationError(where + "unknown label '" + std::string(knowledge) + "' in column knowledge");
  rec.cognitive = *cog;
  rec.knowledge = *know;
  return rec;
}

CorpusDataset parse_csv(std::string_view content, std::string source) {
  CorpusDataset ds;
  ds.source = std::move(source);
  const auto rows = read_csv_rows(content);
  if (rows.empty()) throw ValidationError("missing header; expected 'question,cognitive,knowledge'");
  const auto& header = rows.front().fields;
  const std::vector<std::string> expected = {"question", "cognitive", "knowledge"};
  if (header != expected) {
    std::string got;
    for (std::size_t i = 0; i < header.size(); ++i) got += (i ? "," : "") + header[i];
    throw ValidationError("bad header '" + got + "'; expected 'question,cognitive,knowledge'");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() < 3) {
      throw ValidationError("line " + std::to_string(row.line) + ": missing columns (got " +
                            std::to_string(row.fields.size()) + ", expected 3)");
    }
    if (row.fields.size() > 3) {
      throw ValidationError("line " + std::to_string(row.line) + ": extra columns (got " +
                            std::to_string(row.fields.size()) + ", expected 3)");
    }
    ds.records.push_back(make_record(row.fields[0], row.fields[1], row.fields[2], row.line));
  }
  return ds;
}

CorpusDataset parse_jsonl(std::string_view content, std::string source) {
  CorpusDataset ds;
  ds.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + "invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw ValidationError(where + "expected a JSON object");
    for (const char* key : {"question", "cognitive", "knowledge"}) {
      if (!obj.contains(key)) throw ValidationError(where + "missing column '" + key + "'");
      if (!obj[key].is_string()) throw ValidationError(where + "column '" + key + "' must be a string");
    }
    if (obj.size() != 3) throw ValidationError(where + "extra columns (expected question, cognitive, knowledge)");
    ds.records.push_back(make_record(obj["question"].get<std::string>(), obj["cognitive"].get<std::string>(),
                                     obj["knowledge"].get<std::string>(), line_no));
  }
  return ds;
}

std::string csv_quote(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos || field != trim(field);
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::size_t num_classes(Task task) { return task == Task::Cognitive ? kNumCognitive : kNumKnowledge; }

std::string_view to_string(Task task) { return task == Task::Cognitive ? "cognitive" : "knowledge"; }

Task parse_task(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "cognitive") return Task::Cognitive;
  if (v == "knowledge") return Task::Knowledge;
  throw ValidationError("unknown task '" + std::string(s) + "' (expected cognitive or knowledge)");
}

std::string_view to_string(CognitiveLabel label) { return kCognitiveNames.at(static_cast<std::size_t>(label)); }
std::string_view to_string(KnowledgeLabel label) { return kKnowledgeNames.at(static_cast<std::size_t>(label)); }

std::optional<CognitiveLabel> parse_cognitive(std::string_view s) {
  if (auto i = find_name(kCognitiveNames, s)) return static_cast<CognitiveLabel>(*i);
  return std::nullopt;
}

std::optional<KnowledgeLabel> parse_knowledge(std::string_view s) {
  if (auto i = find_name(kKnowledgeNames, s)) return static_cast<KnowledgeLabel>(*i);
  return std::nullopt;
}

std::string_view class_name(Task task, std::size_t index) {
  return task == Task::Cognitive ? kCognitiveNames.at(index) : kKnowledgeNames.at(index);
}

DistributionTable table1_distribution() {
  DistributionTable t;
  t.cognitive = {202, 464, 61, 29, 41, 47};
  t.knowledge = {320, 290, 234};
  t.total = 844;
  return t;
}

CorpusFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = ascii_lower(path.extension().string());
  return (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") ? CorpusFormat::Jsonl : CorpusFormat::Csv;
}

CorpusDataset parse_corpus_text(std::string_view content, CorpusFormat format, std::string source) {
  if (const auto bad = first_invalid_utf8(content)) {
    throw ValidationError("malformed UTF-8 at byte offset " + std::to_string(*bad) + " in " + source);
  }
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
  return format == CorpusFormat::Csv ? parse_csv(content, std::move(source)) : parse_jsonl(content, std::move(source));
}

CorpusDataset parse_corpus(const std::filesystem::path& path, CorpusFormat format) {
  const std::string content = read_text_file(path);
  try {
    return parse_corpus_text(content, format, path.string());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_corpus(const CorpusDataset& ds, CorpusFormat format) {
  std::string out;
  if (format == CorpusFormat::Csv) {
    out += "question,cognitive,knowledge\n";
    for (const auto& r : ds.records) {
      out += csv_quote(r.text);
      out += ',';
      out += to_string(r.cognitive);
      out += ',';
      out += to_string(r.knowledge);
      out += '\n';
    }
  } else {
    for (const auto& r : ds.records) {
      nlohmann::ordered_json obj;
      obj["question"] = r.text;
      obj["cognitive"] = std::string(to_string(r.cognitive));
      obj["knowledge"] = std::string(to_string(r.knowledge));
      out += obj.dump();
      out += '\n';
    }
  }
  return out;
}

void write_corpus(const CorpusDataset& ds, const std::filesystem::path& path, CorpusFormat format) {
  write_text_file(path, serialize_corpus(ds, format));
}

DistributionTable class_distribution(const CorpusDataset& ds) {
  DistributionTable t;
  for (const auto& r : ds.records) {
    ++t.cognitive[static_cast<std::size_t>(r.cognitive)];
    ++t.knowledge[static_cast<std::size_t>(r.knowledge)];
  }
  t.total = static_cast<std::int64_t>(ds.records.size());
  return t;
}

std::pair<CorpusDataset, CorpusDataset> split_train_test(const CorpusDataset& ds, double train_ratio,
                                                         std::uint64_t seed, Task stratify_by) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ValidationError("train ratio must lie strictly between 0 and 1, got " + std::to_string(train_ratio));
  }
  const std::size_t n = ds.size();
  const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_ratio));
  if (target == 0 || target >= n) {
    throw ValidationError("dataset of " + std::to_string(n) + " records is too small to split at ratio " +
                          std::to_string(train_ratio));
  }

  const std::size_t classes = num_classes(stratify_by);
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < n; ++i) members[ds.records[i].label_index(stratify_by)].push_back(i);

  // Largest-remainder allocation of the train quota across classes.
  std::vector<std::size_t> quota(classes);
  std::vector<double> remainder(classes);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double exact = static_cast<double>(members[c].size()) * train_ratio;
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target; k = (k + 1) % classes) {
    const std::size_t c = order[k];
    if (quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng(mix_seed(seed, 0x5b117ULL));
  std::vector<char> in_train(n, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& idx = members[c];
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = 0; k < quota[c]; ++k) in_train[idx[k]] = 1;
  }

  CorpusDataset train;
  CorpusDataset test;
  train.source = ds.source + " [train seed=" + std::to_string(seed) + "]";
  test.source = ds.source + " [test seed=" + std::to_string(seed) + "]";
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? train : test).records.push_back(ds.records[i]);
  return {std::move(train), std::move(test)};
}

std::array<std::array<std::int64_t, kNumKnowledge>, kNumCognitive> allocate_joint_counts(
    const DistributionTable& dist, std::uint64_t seed) {
  std::int64_t cog_total = 0;
  std::int64_t know_total = 0;
  for (auto c : dist.cognitive) {
    if (c < 0) throw ValidationError("distribution counts must be non-negative");
    cog_total += c;
  }
  for (auto k : dist.knowledge) {
    if (k < 0) throw ValidationError("distribution counts must be non-negative");
    know_total += k;
  }
  if (cog_total != know_total) {
    throw ValidationError("inconsistent marginals: cognitive total " + std::to_string(cog_total) +
                          " != knowledge total " + std::to_string(know_total));
  }

  std::array<std::array<std::int64_t, kNumKnowledge>, kNumCognitive> cells{};
  if (cog_total == 0) return cells;

  // Iterative proportional fitting from a seeded positive start matrix.
  Rng rng(mix_seed(seed, 0x1bf0ULL));
  std::array<std::array<double, kNumKnowledge>, kNumCognitive> m{};
  for (auto& row : m)
    for (auto& v : row) v = 0.5 + rng.uniform();
  for (int iter = 0; iter < 200; ++iter) {
    for (std::size_t i = 0; i < kNumCognitive; ++i) {
      double s = 0;
      for (double v : m[i]) s += v;
      for (auto& v : m[i]) v = s > 0 ? v * static_cast<double>(dist.cognitive[i]) / s : 0.0;
    }
    for (std::size_t j = 0; j < kNumKnowledge; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < kNumCognitive; ++i) s += m[i][j];
      for (std::size_t i = 0; i < kNumCognitive; ++i) {
        m[i][j] = s > 0 ? m[i][j] * static_cast<double>(dist.knowledge[j]) / s : 0.0;
      }
    }
  }

  // Integerize: floors, then hand out the deficits by descending fraction.
  std::array<std::int64_t, kNumCognitive> row_deficit = dist.cognitive;
  std::array<std::int64_t, kNumKnowledge> col_deficit = dist.knowledge;
  struct Cell {
    std::size_t i, j;
    double frac;
  };
  std::vector<Cell> fracs;
  for (std::size_t i = 0; i < kNumCognitive; ++i) {
    for (std::size_t j = 0; j < kNumKnowledge; ++j) {
      const double fl = std::floor(m[i][j]);
      cells[i][j] = static_cast<std::int64_t>(fl);
      row_deficit[i] -= cells[i][j];
      col_deficit[j] -= cells[i][j];
      fracs.push_back({i, j, m[i][j] - fl});
    }
  }
  std::stable_sort(fracs.begin(), fracs.end(), [](const Cell& a, const Cell& b) { return a.frac > b.frac; });
  for (const auto& c : fracs) {
    if (row_deficit[c.i] > 0 && col_deficit[c.j] > 0) {
      ++cells[c.i][c.j];
      --row_deficit[c.i];
      --col_deficit[c.j];
    }
  }
  for (std::size_t i = 0; i < kNumCognitive; ++i) {
    for (std::size_t j = 0; j < kNumKnowledge && row_deficit[i] > 0; ++j) {
      const std::int64_t take = std::min(row_deficit[i], col_deficit[j]);
      cells[i][j] += take;
      row_deficit[i] -= take;
      col_deficit[j] -= take;
    }
  }
  return cells;
}

}  // namespace bloom
