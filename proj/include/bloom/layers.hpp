#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bloom/numarray.hpp"
#include "bloom/rng.hpp"

namespace bloom::nn {

enum class Mode { Train, Infer };

inline constexpr double kLogEpsilon = 1e-12;

// ---- embedding -------------------------------------------------------------

/// Row t of the result is table row seq[t]. Throws std::out_of_range for an
/// index outside the table.
NumArray embedding_forward(const NumArray& table, std::span<const std::int32_t> seq);

/// Scatter-adds d_out rows into d_table; repeated indices accumulate.
void embedding_backward(const NumArray& d_out, std::span<const std::int32_t> seq, NumArray& d_table);

// ---- spatial dropout --------------------------------------------------------

/// Per-channel scale factors: 0 with probability `rate`, else 1/(1-rate).
/// Infer mode or rate 0 gives all ones without touching the generator.
std::vector<double> channel_dropout_mask(std::size_t channels, double rate, Mode mode, Rng& rng);

/// Multiplies column e of a [T x E] array by mask[e].
void scale_channels(NumArray& x, std::span<const double> mask);

/// Zeroes whole embedding channels across every time step (train mode).
NumArray spatial_dropout(const NumArray& input, double rate, Mode mode, Rng& rng);

// ---- 1-D convolution + global max pooling -----------------------------------

struct ConvWeights {
  const NumArray& kernels;  // [filters x width x channels]
  const NumArray& bias;     // [filters]
};

struct ConvGrads {
  NumArray& kernels;
  NumArray& bias;
};

struct ConvTrace {
  std::vector<double> features;  // relu(max_t z[t, f])
  std::vector<std::size_t> argmax;  // first time step attaining the max
};

/// Valid convolution over time with full-width channels, bias, ReLU, then
/// the per-filter maximum over time.
ConvTrace conv1d_globalmax_forward(ConvWeights w, const NumArray& embedded);

/// Routes each filter's gradient through its argmax window. Accumulates into
/// `grads` and `d_embedded`.
void conv1d_globalmax_backward(ConvWeights w, const NumArray& embedded, const ConvTrace& trace,
                               std::span<const double> d_features, ConvGrads grads, NumArray& d_embedded);

// ---- LSTM -------------------------------------------------------------------

/// Gate blocks are stored in the order input, forget, cell, output.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };

struct LstmWeights {
  const NumArray& input;      // [4 x units x channels]
  const NumArray& recurrent;  // [4 x units x units]
  const NumArray& bias;       // [4 x units]
};

struct LstmGrads {
  NumArray& input;
  NumArray& recurrent;
  NumArray& bias;
};

struct LstmDropout {
  double input = 0.0;
  double recurrent = 0.0;
};

struct LstmTrace {
  std::vector<double> input_mask;      // [channels]
  std::vector<double> recurrent_mask;  // [units]
  NumArray x;                          // masked input [T x channels]
  NumArray h;                          // [T+1 x units], row 0 is h0
  NumArray c;                          // [T+1 x units]
  NumArray gates;                      // [T x 4 x units], post-activation
};

/// Runs the recurrence from h0 = c0 = 0 and returns h_T. In train mode one
/// input mask and one recurrent mask are drawn and reused at every step.
std::vector<double> lstm_forward(LstmWeights w, const NumArray& embedded, LstmDropout dropout, Mode mode, Rng& rng,
                                 LstmTrace* trace = nullptr);

/// Backpropagation through time from dL/dh_T.
void lstm_backward(LstmWeights w, const LstmTrace& trace, std::span<const double> d_last_hidden, LstmGrads grads,
                   NumArray& d_embedded);

// ---- output layer and loss -------------------------------------------------

/// logits[c] = sum_f features[f] * weights[f, c] + bias[c]
std::vector<double> dense_forward(const NumArray& weights, const NumArray& bias, std::span<const double> features);

/// d_features is overwritten; weight/bias gradients accumulate.
void dense_backward(const NumArray& weights, std::span<const double> features, std::span<const double> d_logits,
                    NumArray& d_weights, NumArray& d_bias, std::span<double> d_features);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Sigmoid activations normalized to sum to one.
std::vector<double> normalized_sigmoid(std::span<const double> logits);

std::vector<double> dense_softmax_forward(const NumArray& weights, const NumArray& bias,
                                          std::span<const double> features);

/// -sum_i t_i log(max(s_i, 1e-12)). Throws std::invalid_argument on a
/// length mismatch.
double cross_entropy(std::span<const double> truth, std::span<const double> probs);

/// Gradient of cross-entropy w.r.t. the logits for softmax outputs: probs - truth.
std::vector<double> softmax_cross_entropy_grad(std::span<const double> truth, std::span<const double> probs);

/// Same for the normalized-sigmoid output.
std::vector<double> normalized_sigmoid_cross_entropy_grad(std::span<const double> truth,
                                                          std::span<const double> logits);

}  // namespace bloom::nn
