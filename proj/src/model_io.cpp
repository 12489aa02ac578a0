#include "bloom/model_io.hpp"

#include <charconv>
#include <cstdio>

#include "bloom/error.hpp"
#include "bloom/text_util.hpp"

namespace bloom {

namespace {

constexpr std::string_view kMagic = "bloom-model v1";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::size_t to_size(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("model file: bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

// Line cursor over the file contents.
class Lines {
 public:
  explicit Lines(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }

  std::string_view next() {
    if (done()) throw ValidationError("model file: unexpected end of file");
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    const auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_no_;
    return line;
  }

  std::string_view take_bytes(std::size_t n) {
    if (pos_ + n > text_.size()) throw ValidationError("model file: truncated vocabulary block");
    const auto block = text_.substr(pos_, n);
    pos_ += n;
    return block;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::pair<std::string_view, std::string_view> split_key(std::string_view line) {
  const auto sp = line.find(' ');
  if (sp == std::string_view::npos) return {line, {}};
  return {line.substr(0, sp), line.substr(sp + 1)};
}

}  // namespace

void validate_model_shapes(const ModelParams& params, Task task, const Vocabulary& vocab) {
  auto fail = [](const std::string& msg) { throw ValidationError("model shape mismatch: " + msg); };
  const std::size_t classes = num_classes(task);
  if (num_classes(params) != classes) {
    fail("output layer has " + std::to_string(num_classes(params)) + " classes, task " + std::string(to_string(task)) +
         " needs " + std::to_string(classes));
  }
  if (embedding_rows(params) != vocab.embedding_rows()) {
    fail("embedding has " + std::to_string(embedding_rows(params)) + " rows, vocabulary needs " +
         std::to_string(vocab.embedding_rows()));
  }
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if (p.embedding.rank() != 2) fail("embedding must be 2-D");
        const std::size_t emb = p.embedding.dim(1);
        if constexpr (std::is_same_v<P, CnnParams>) {
          if (p.kernels.rank() != 3 || p.kernels.dim(2) != emb) fail("conv kernels " + p.kernels.shape_string());
          const std::size_t filters = p.kernels.dim(0);
          if (p.conv_bias.shape() != std::vector<std::size_t>{filters}) fail("conv bias " + p.conv_bias.shape_string());
          if (p.out_weights.shape() != std::vector<std::size_t>{filters, classes}) {
            fail("output weights " + p.out_weights.shape_string());
          }
        } else {
          if (p.input.rank() != 3 || p.input.dim(0) != 4 || p.input.dim(2) != emb) {
            fail("lstm input weights " + p.input.shape_string());
          }
          const std::size_t units = p.input.dim(1);
          if (p.recurrent.shape() != std::vector<std::size_t>{4, units, units}) {
            fail("lstm recurrent weights " + p.recurrent.shape_string());
          }
          if (p.bias.shape() != std::vector<std::size_t>{4, units}) fail("lstm bias " + p.bias.shape_string());
          if (p.out_weights.shape() != std::vector<std::size_t>{units, classes}) {
            fail("output weights " + p.out_weights.shape_string());
          }
        }
        if (p.out_bias.shape() != std::vector<std::size_t>{classes}) fail("output bias " + p.out_bias.shape_string());
      },
      params);
}

std::string serialize_model(const SavedModel& model) {
  validate_model_shapes(model.params, model.task, model.vocab);
  const std::string vocab_text = model.vocab.serialize();

  std::string out(kMagic);
  out += '\n';
  out += "architecture " + std::string(to_string(architecture_of(model.params))) + '\n';
  out += "task " + std::string(to_string(model.task)) + '\n';
  if (const auto* cnn = std::get_if<CnnParams>(&model.params)) {
    out += "output " + std::string(to_string(cnn->output)) + '\n';
  }
  out += "vocab_hash " + hex64(fnv1a64(vocab_text)) + '\n';
  for (const auto& [key, value] : model.config) out += "config " + key + '=' + value + '\n';
  for_each_tensor(model.params, [&](std::string_view name, const NumArray& t) {
    out += "tensor " + std::string(name) + ' ' + std::to_string(t.rank());
    for (auto d : t.shape()) out += ' ' + std::to_string(d);
    out += '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out += ' ';
      out += format_double(t[i]);
    }
    out += '\n';
  });
  out += "vocab " + std::to_string(vocab_text.size()) + '\n';
  out += vocab_text;
  out += "end\n";
  return out;
}

SavedModel deserialize_model(std::string_view text) {
  Lines lines(text);
  if (lines.done() || lines.next() != kMagic) {
    throw ValidationError("not a model file (expected '" + std::string(kMagic) + "' header)");
  }
  SavedModel model;
  Architecture arch = Architecture::Cnn;
  OutputActivation output = OutputActivation::Softmax;
  std::string vocab_hash;
  std::vector<std::pair<std::string, NumArray>> tensors;
  bool have_arch = false;
  bool have_task = false;
  bool have_vocab = false;

  while (true) {
    const auto line = lines.next();
    const auto [key, rest] = split_key(line);
    if (key == "architecture") {
      arch = parse_architecture(rest);
      have_arch = true;
    } else if (key == "task") {
      model.task = parse_task(rest);
      have_task = true;
    } else if (key == "output") {
      output = parse_output_activation(rest);
    } else if (key == "vocab_hash") {
      vocab_hash = std::string(rest);
    } else if (key == "config") {
      const auto eq = rest.find('=');
      if (eq == std::string_view::npos) throw ValidationError("model file: malformed config line");
      model.config.emplace_back(std::string(rest.substr(0, eq)), std::string(rest.substr(eq + 1)));
    } else if (key == "tensor") {
      const auto parts = split(rest, ' ');
      if (parts.size() < 2) throw ValidationError("model file: malformed tensor header");
      const std::size_t rank = to_size(parts[1], "rank");
      if (parts.size() != 2 + rank) throw ValidationError("model file: tensor " + parts[0] + " rank/shape mismatch");
      std::vector<std::size_t> shape;
      for (std::size_t i = 0; i < rank; ++i) shape.push_back(to_size(parts[2 + i], "dimension"));
      NumArray t(shape);
      const auto values = lines.next();
      std::size_t k = 0;
      std::size_t pos = 0;
      while (pos <= values.size() && !values.empty()) {
        auto sp = values.find(' ', pos);
        if (sp == std::string_view::npos) sp = values.size();
        if (k >= t.size()) throw ValidationError("model file: tensor " + parts[0] + " has too many values");
        t[k++] = parse_double(values.substr(pos, sp - pos));
        pos = sp + 1;
      }
      if (k != t.size()) throw ValidationError("model file: tensor " + parts[0] + " has too few values");
      tensors.emplace_back(parts[0], std::move(t));
    } else if (key == "vocab") {
      const auto block = lines.take_bytes(to_size(rest, "vocabulary length"));
      if (hex64(fnv1a64(block)) != vocab_hash) {
        throw ValidationError("model file: vocabulary hash mismatch (expected " + vocab_hash + ", got " +
                              hex64(fnv1a64(block)) + ")");
      }
      model.vocab = Vocabulary::deserialize(block);
      have_vocab = true;
    } else if (key == "end") {
      break;
    } else {
      throw ValidationError("model file line " + std::to_string(lines.line_no()) + ": unknown record '" +
                            std::string(key) + "'");
    }
  }
  if (!have_arch || !have_task || !have_vocab) {
    throw ValidationError("model file: missing architecture, task, or vocabulary section");
  }

  if (arch == Architecture::Cnn) {
    CnnParams p;
    p.output = output;
    model.params = std::move(p);
  } else {
    model.params = LstmParams{};
  }
  std::size_t k = 0;
  for_each_tensor(model.params, [&](std::string_view name, NumArray& t) {
    if (k >= tensors.size() || tensors[k].first != name) {
      throw ValidationError("model file: expected tensor '" + std::string(name) + "'");
    }
    t = std::move(tensors[k++].second);
  });
  if (k != tensors.size()) throw ValidationError("model file: unexpected extra tensors");
  validate_model_shapes(model.params, model.task, model.vocab);
  return model;
}

void save_model(const SavedModel& model, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(model));
}

SavedModel load_model(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return deserialize_model(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace bloom
