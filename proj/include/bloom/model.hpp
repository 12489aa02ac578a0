#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bloom/corpus.hpp"
#include "bloom/layers.hpp"
#include "bloom/numarray.hpp"
#include "bloom/rng.hpp"

namespace bloom {

enum class Architecture { Cnn, Lstm };

std::string_view to_string(Architecture arch);
Architecture parse_architecture(std::string_view s);

/// Output normalization of the CNN head.
enum class OutputActivation { Softmax, Sigmoid };

std::string_view to_string(OutputActivation act);
OutputActivation parse_output_activation(std::string_view s);

struct CnnParams {
  NumArray embedding;    // [vocab x emb_dim]
  NumArray kernels;      // [filters x width x emb_dim]
  NumArray conv_bias;    // [filters]
  NumArray out_weights;  // [filters x classes]
  NumArray out_bias;     // [classes]
  OutputActivation output = OutputActivation::Softmax;

  template <typename Self, typename F>
  static void visit(Self& self, F&& fn) {
    fn("embedding", self.embedding);
    fn("conv_kernels", self.kernels);
    fn("conv_bias", self.conv_bias);
    fn("out_weights", self.out_weights);
    fn("out_bias", self.out_bias);
  }

  std::size_t num_classes() const { return out_bias.size(); }
  friend bool operator==(const CnnParams&, const CnnParams&) = default;
};

struct LstmParams {
  NumArray embedding;    // [vocab x emb_dim]
  NumArray input;        // W: [4 x units x emb_dim]
  NumArray recurrent;    // U: [4 x units x units]
  NumArray bias;         // [4 x units]
  NumArray out_weights;  // [units x classes]
  NumArray out_bias;     // [classes]

  template <typename Self, typename F>
  static void visit(Self& self, F&& fn) {
    fn("embedding", self.embedding);
    fn("lstm_input", self.input);
    fn("lstm_recurrent", self.recurrent);
    fn("lstm_bias", self.bias);
    fn("out_weights", self.out_weights);
    fn("out_bias", self.out_bias);
  }

  std::size_t units() const { return recurrent.dim(1); }
  std::size_t num_classes() const { return out_bias.size(); }
  friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

/// Trainable weights of one architecture. Gradients use the same type.
using ModelParams = std::variant<CnnParams, LstmParams>;

Architecture architecture_of(const ModelParams& params);
std::size_t num_classes(const ModelParams& params);
std::size_t embedding_rows(const ModelParams& params);
std::size_t parameter_count(const ModelParams& params);

/// Calls fn(name, NumArray&) for every trainable tensor, in a fixed order.
template <typename F>
void for_each_tensor(ModelParams& params, F&& fn) {
  std::visit([&](auto& p) { std::decay_t<decltype(p)>::visit(p, fn); }, params);
}
template <typename F>
void for_each_tensor(const ModelParams& params, F&& fn) {
  std::visit([&](const auto& p) { std::decay_t<decltype(p)>::visit(p, fn); }, params);
}

/// Visits matching tensors of two structurally identical parameter sets.
template <typename F>
void for_each_tensor_pair(ModelParams& a, const ModelParams& b, F&& fn) {
  std::vector<const NumArray*> rhs;
  for_each_tensor(b, [&](std::string_view, const NumArray& t) { rhs.push_back(&t); });
  std::size_t k = 0;
  for_each_tensor(a, [&](std::string_view name, NumArray& t) { fn(name, t, *rhs.at(k++)); });
}

/// Same shapes as `params`, all zeros.
ModelParams zeros_like(const ModelParams& params);
void set_zero(ModelParams& params);
bool same_shapes(const ModelParams& a, const ModelParams& b);
bool all_finite(const ModelParams& params);

struct DropoutConfig {
  double spatial = 0.0;    // channel dropout after the embedding
  double lstm_input = 0.0;
  double lstm_recurrent = 0.0;
};

using Probabilities = std::vector<double>;

/// End-to-end forward pass for one padded sequence. Infer mode is
/// deterministic and leaves `rng` untouched.
Probabilities model_forward(const ModelParams& params, std::span<const std::int32_t> seq, const DropoutConfig& dropout,
                            nn::Mode mode, Rng& rng);

struct BackwardResult {
  double loss = 0.0;
  Probabilities probs;
};

/// Loss and exact gradient of cross-entropy over model_forward. The
/// gradient accumulates into `grads` (shape-congruent with `params`). The
/// dropout masks come from `rng` exactly as in the paired forward call.
BackwardResult model_backward(const ModelParams& params, std::span<const std::int32_t> seq,
                              std::span<const double> truth, const DropoutConfig& dropout, nn::Mode mode, Rng& rng,
                              ModelParams& grads);

}  // namespace bloom
