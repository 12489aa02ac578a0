#include "bloom/model.hpp"

#include <stdexcept>

#include "bloom/error.hpp"
#include "bloom/text_util.hpp"

namespace bloom {

std::string_view to_string(Architecture arch) { return arch == Architecture::Cnn ? "cnn" : "lstm"; }

Architecture parse_architecture(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "cnn") return Architecture::Cnn;
  if (v == "lstm") return Architecture::Lstm;
  throw ValidationError("unknown architecture '" + std::string(s) + "' (expected cnn or lstm)");
}

std::string_view to_string(OutputActivation act) { return act == OutputActivation::Softmax ? "softmax" : "sigmoid"; }

OutputActivation parse_output_activation(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "softmax") return OutputActivation::Softmax;
  if (v == "sigmoid") return OutputActivation::Sigmoid;
  throw ValidationError("unknown output activation '" + std::string(s) + "' (expected softmax or sigmoid)");
}

Architecture architecture_of(const ModelParams& params) {
  return std::holds_alternative<CnnParams>(params) ? Architecture::Cnn : Architecture::Lstm;
}

std::size_t num_classes(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.num_classes(); }, params);
}

std::size_t embedding_rows(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.embedding.dim(0); }, params);
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for_each_tensor(params, [&](std::string_view, const NumArray& t) { n += t.size(); });
  return n;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams out = params;
  set_zero(out);
  return out;
}

void set_zero(ModelParams& params) {
  for_each_tensor(params, [](std::string_view, NumArray& t) { t.fill(0.0); });
}

bool same_shapes(const ModelParams& a, const ModelParams& b) {
  if (a.index() != b.index()) return false;
  std::vector<std::vector<std::size_t>> shapes;
  for_each_tensor(a, [&](std::string_view, const NumArray& t) { shapes.push_back(t.shape()); });
  std::size_t k = 0;
  bool same = true;
  for_each_tensor(b, [&](std::string_view, const NumArray& t) { same = same && shapes.at(k++) == t.shape(); });
  return same;
}

bool all_finite(const ModelParams& params) {
  bool ok = true;
  for_each_tensor(params, [&](std::string_view, const NumArray& t) { ok = ok && t.all_finite(); });
  return ok;
}

namespace {

struct Forward {
  NumArray embedded;              // after spatial dropout
  std::vector<double> channel_mask;
  std::vector<double> features;
  std::vector<double> logits;
  Probabilities probs;
  nn::ConvTrace conv;
  nn::LstmTrace lstm;
};

Forward run_forward(const ModelParams& params, std::span<const std::int32_t> seq, const DropoutConfig& dropout,
                    nn::Mode mode, Rng& rng, bool keep_trace) {
  Forward fw;
  std::visit(
      [&](const auto& p) {
        fw.embedded = nn::embedding_forward(p.embedding, seq);
        fw.channel_mask = nn::channel_dropout_mask(fw.embedded.dim(1), dropout.spatial, mode, rng);
        nn::scale_channels(fw.embedded, fw.channel_mask);
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CnnParams>) {
          fw.conv = nn::conv1d_globalmax_forward({p.kernels, p.conv_bias}, fw.embedded);
          fw.features = fw.conv.features;
          fw.logits = nn::dense_forward(p.out_weights, p.out_bias, fw.features);
          fw.probs = p.output == OutputActivation::Softmax ? nn::softmax(fw.logits) : nn::normalized_sigmoid(fw.logits);
        } else {
          fw.features = nn::lstm_forward({p.input, p.recurrent, p.bias}, fw.embedded,
                                         {dropout.lstm_input, dropout.lstm_recurrent}, mode, rng,
                                         keep_trace ? &fw.lstm : nullptr);
          fw.logits = nn::dense_forward(p.out_weights, p.out_bias, fw.features);
          fw.probs = nn::softmax(fw.logits);
        }
      },
      params);
  return fw;
}

}  // namespace

Probabilities model_forward(const ModelParams& params, std::span<const std::int32_t> seq, const DropoutConfig& dropout,
                            nn::Mode mode, Rng& rng) {
  return run_forward(params, seq, dropout, mode, rng, false).probs;
}

BackwardResult model_backward(const ModelParams& params, std::span<const std::int32_t> seq,
                              std::span<const double> truth, const DropoutConfig& dropout, nn::Mode mode, Rng& rng,
                              ModelParams& grads) {
  if (params.index() != grads.index()) throw std::invalid_argument("gradient buffer has the wrong architecture");
  if (truth.size() != num_classes(params)) {
    throw std::invalid_argument("truth vector has length " + std::to_string(truth.size()) + ", model outputs " +
                                std::to_string(num_classes(params)));
  }
  Forward fw = run_forward(params, seq, dropout, mode, rng, true);
  BackwardResult result;
  result.loss = nn::cross_entropy(truth, fw.probs);

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        auto& g = std::get<P>(grads);
        std::vector<double> d_logits;
        if constexpr (std::is_same_v<P, CnnParams>) {
          d_logits = p.output == OutputActivation::Softmax
                         ? nn::softmax_cross_entropy_grad(truth, fw.probs)
                         : nn::normalized_sigmoid_cross_entropy_grad(truth, fw.logits);
        } else {
          d_logits = nn::softmax_cross_entropy_grad(truth, fw.probs);
        }
        std::vector<double> d_features(fw.features.size());
        nn::dense_backward(p.out_weights, fw.features, d_logits, g.out_weights, g.out_bias, d_features);

        NumArray d_embedded(fw.embedded.shape());
        if constexpr (std::is_same_v<P, CnnParams>) {
          nn::conv1d_globalmax_backward({p.kernels, p.conv_bias}, fw.embedded, fw.conv, d_features,
                                        {g.kernels, g.conv_bias}, d_embedded);
        } else {
          nn::lstm_backward({p.input, p.recurrent, p.bias}, fw.lstm, d_features, {g.input, g.recurrent, g.bias},
                            d_embedded);
        }
        nn::scale_channels(d_embedded, fw.channel_mask);
        nn::embedding_backward(d_embedded, seq, g.embedding);
      },
      params);

  result.probs = std::move(fw.probs);
  return result;
}

}  // namespace bloom
