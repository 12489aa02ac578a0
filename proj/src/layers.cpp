#include "bloom/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bloom::nn {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

}  // namespace

NumArray embedding_forward(const NumArray& table, std::span<const std::int32_t> seq) {
  const std::size_t rows = table.dim(0);
  const std::size_t dim = table.dim(1);
  NumArray out({seq.size(), dim});
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto idx = seq[t];
    if (idx < 0 || static_cast<std::size_t>(idx) >= rows) {
      throw std::out_of_range("token index " + std::to_string(idx) + " outside embedding table of " +
                              std::to_string(rows) + " rows");
    }
    const auto src = table.row(static_cast<std::size_t>(idx));
    std::copy(src.begin(), src.end(), out.row(t).begin());
  }
  return out;
}

void embedding_backward(const NumArray& d_out, std::span<const std::int32_t> seq, NumArray& d_table) {
  for (std::size_t t = 0; t < seq.size(); ++t) {
    auto dst = d_table.row(static_cast<std::size_t>(seq[t]));
    const auto src = d_out.row(t);
    for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
  }
}

std::vector<double> channel_dropout_mask(std::size_t channels, double rate, Mode mode, Rng& rng) {
  check_rate(rate);
  std::vector<double> mask(channels, 1.0);
  if (mode == Mode::Infer || rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

void scale_channels(NumArray& x, std::span<const double> mask) {
  const std::size_t steps = x.dim(0);
  const std::size_t channels = x.dim(1);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t e = 0; e < channels; ++e) x(t, e) *= mask[e];
  }
}

NumArray spatial_dropout(const NumArray& input, double rate, Mode mode, Rng& rng) {
  const auto mask = channel_dropout_mask(input.dim(1), rate, mode, rng);
  NumArray out = input;
  if (mode == Mode::Train && rate > 0.0) scale_channels(out, mask);
  return out;
}

ConvTrace conv1d_globalmax_forward(ConvWeights w, const NumArray& embedded) {
  const std::size_t filters = w.kernels.dim(0);
  const std::size_t width = w.kernels.dim(1);
  const std::size_t channels = w.kernels.dim(2);
  const std::size_t steps = embedded.dim(0);
  if (embedded.dim(1) != channels) {
    throw std::invalid_argument("conv input has " + std::to_string(embedded.dim(1)) + " channels, kernels expect " +
                                std::to_string(channels));
  }
  if (steps < width) {
    throw std::invalid_argument("sequence length " + std::to_string(steps) + " is shorter than kernel width " +
                                std::to_string(width));
  }
  const std::size_t positions = steps - width + 1;
  const std::size_t window = width * channels;

  ConvTrace trace;
  trace.features.assign(filters, 0.0);
  trace.argmax.assign(filters, 0);
  for (std::size_t f = 0; f < filters; ++f) {
    const double* kernel = w.kernels.raw() + f * window;
    double best = 0.0;
    std::size_t best_t = 0;
    for (std::size_t t = 0; t < positions; ++t) {
      // Rows t..t+width-1 of a row-major [T x C] array are contiguous.
      const double* x = embedded.raw() + t * channels;
      double z = w.bias[f];
      for (std::size_t k = 0; k < window; ++k) z += kernel[k] * x[k];
      if (t == 0 || z > best) {
        best = z;
        best_t = t;
      }
    }
    trace.argmax[f] = best_t;
    trace.features[f] = best > 0.0 ? best : 0.0;
  }
  return trace;
}

void conv1d_globalmax_backward(ConvWeights w, const NumArray& embedded, const ConvTrace& trace,
                               std::span<const double> d_features, ConvGrads grads, NumArray& d_embedded) {
  const std::size_t filters = w.kernels.dim(0);
  const std::size_t channels = w.kernels.dim(2);
  const std::size_t window = w.kernels.dim(1) * channels;
  for (std::size_t f = 0; f < filters; ++f) {
    if (trace.features[f] <= 0.0) continue;  // ReLU inactive
    const double d = d_features[f];
    const std::size_t offset = trace.argmax[f] * channels;
    const double* kernel = w.kernels.raw() + f * window;
    double* d_kernel = grads.kernels.raw() + f * window;
    const double* x = embedded.raw() + offset;
    double* dx = d_embedded.raw() + offset;
    for (std::size_t k = 0; k < window; ++k) {
      d_kernel[k] += d * x[k];
      dx[k] += d * kernel[k];
    }
    grads.bias[f] += d;
  }
}

std::vector<double> lstm_forward(LstmWeights w, const NumArray& embedded, LstmDropout dropout, Mode mode, Rng& rng,
                                 LstmTrace* trace) {
  const std::size_t units = w.recurrent.dim(1);
  const std::size_t channels = w.input.dim(2);
  const std::size_t steps = embedded.dim(0);
  if (embedded.dim(1) != channels) {
    throw std::invalid_argument("lstm input has " + std::to_string(embedded.dim(1)) + " channels, weights expect " +
                                std::to_string(channels));
  }

  LstmTrace local;
  LstmTrace& tr = trace ? *trace : local;
  tr.input_mask = channel_dropout_mask(channels, dropout.input, mode, rng);
  tr.recurrent_mask = channel_dropout_mask(units, dropout.recurrent, mode, rng);
  tr.x = embedded;
  scale_channels(tr.x, tr.input_mask);
  tr.h = NumArray({steps + 1, units});
  tr.c = NumArray({steps + 1, units});
  tr.gates = NumArray({steps, 4, units});

  std::vector<double> h_masked(units);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto x = tr.x.row(t);
    const auto h_prev = tr.h.row(t);
    for (std::size_t u = 0; u < units; ++u) h_masked[u] = h_prev[u] * tr.recurrent_mask[u];
    for (std::size_t g = 0; g < 4; ++g) {
      for (std::size_t u = 0; u < units; ++u) {
        double z = w.bias(g, u);
        const double* wx = w.input.raw() + (g * units + u) * channels;
        for (std::size_t e = 0; e < channels; ++e) z += wx[e] * x[e];
        const double* uh = w.recurrent.raw() + (g * units + u) * units;
        for (std::size_t v = 0; v < units; ++v) z += uh[v] * h_masked[v];
        tr.gates(t, g, u) = g == kCellGate ? std::tanh(z) : sigmoid(z);
      }
    }
    for (std::size_t u = 0; u < units; ++u) {
      const double c = tr.gates(t, kForgetGate, u) * tr.c(t, u) + tr.gates(t, kInputGate, u) * tr.gates(t, kCellGate, u);
      tr.c(t + 1, u) = c;
      tr.h(t + 1, u) = tr.gates(t, kOutputGate, u) * std::tanh(c);
    }
  }
  const auto last = tr.h.row(steps);
  return {last.begin(), last.end()};
}

void lstm_backward(LstmWeights w, const LstmTrace& trace, std::span<const double> d_last_hidden, LstmGrads grads,
                   NumArray& d_embedded) {
  const std::size_t units = w.recurrent.dim(1);
  const std::size_t channels = w.input.dim(2);
  const std::size_t steps = trace.x.dim(0);

  std::vector<double> dh(d_last_hidden.begin(), d_last_hidden.end());
  std::vector<double> dc_next(units, 0.0);
  std::vector<double> dz(4 * units);
  std::vector<double> h_masked(units);
  std::vector<double> dx(channels);

  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t u = 0; u < units; ++u) {
      const double i = trace.gates(t, kInputGate, u);
      const double f = trace.gates(t, kForgetGate, u);
      const double g = trace.gates(t, kCellGate, u);
      const double o = trace.gates(t, kOutputGate, u);
      const double tc = std::tanh(trace.c(t + 1, u));
      const double dc = dc_next[u] + dh[u] * o * (1.0 - tc * tc);
      dz[kInputGate * units + u] = dc * g * i * (1.0 - i);
      dz[kForgetGate * units + u] = dc * trace.c(t, u) * f * (1.0 - f);
      dz[kCellGate * units + u] = dc * i * (1.0 - g * g);
      dz[kOutputGate * units + u] = dh[u] * tc * o * (1.0 - o);
      dc_next[u] = dc * f;
    }

    const auto x = trace.x.row(t);
    const auto h_prev = trace.h.row(t);
    for (std::size_t u = 0; u < units; ++u) h_masked[u] = h_prev[u] * trace.recurrent_mask[u];
    std::fill(dx.begin(), dx.end(), 0.0);
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t gu = 0; gu < 4 * units; ++gu) {
      const double d = dz[gu];
      grads.bias[gu] += d;
      const double* wx = w.input.raw() + gu * channels;
      double* dwx = grads.input.raw() + gu * channels;
      for (std::size_t e = 0; e < channels; ++e) {
        dwx[e] += d * x[e];
        dx[e] += d * wx[e];
      }
      const double* uh = w.recurrent.raw() + gu * units;
      double* duh = grads.recurrent.raw() + gu * units;
      for (std::size_t v = 0; v < units; ++v) {
        duh[v] += d * h_masked[v];
        dh[v] += d * uh[v];
      }
    }
    for (std::size_t v = 0; v < units; ++v) dh[v] *= trace.recurrent_mask[v];
    auto d_row = d_embedded.row(t);
    for (std::size_t e = 0; e < channels; ++e) d_row[e] += dx[e] * trace.input_mask[e];
  }
}

std::vector<double> dense_forward(const NumArray& weights, const NumArray& bias, std::span<const double> features) {
  const std::size_t in = weights.dim(0);
  const std::size_t out = weights.dim(1);
  if (features.size() != in) {
    throw std::invalid_argument("dense layer expects " + std::to_string(in) + " features, got " +
                                std::to_string(features.size()));
  }
  std::vector<double> logits(bias.data().begin(), bias.data().end());
  for (std::size_t f = 0; f < in; ++f) {
    const double x = features[f];
    const double* wrow = weights.raw() + f * out;
    for (std::size_t c = 0; c < out; ++c) logits[c] += x * wrow[c];
  }
  return logits;
}

void dense_backward(const NumArray& weights, std::span<const double> features, std::span<const double> d_logits,
                    NumArray& d_weights, NumArray& d_bias, std::span<double> d_features) {
  const std::size_t in = weights.dim(0);
  const std::size_t out = weights.dim(1);
  for (std::size_t c = 0; c < out; ++c) d_bias[c] += d_logits[c];
  for (std::size_t f = 0; f < in; ++f) {
    const double* wrow = weights.raw() + f * out;
    double* dwrow = d_weights.raw() + f * out;
    double acc = 0.0;
    for (std::size_t c = 0; c < out; ++c) {
      dwrow[c] += features[f] * d_logits[c];
      acc += wrow[c] * d_logits[c];
    }
    d_features[f] = acc;
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<double> normalized_sigmoid(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = sigmoid(logits[i]);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<double> dense_softmax_forward(const NumArray& weights, const NumArray& bias,
                                          std::span<const double> features) {
  return softmax(dense_forward(weights, bias, features));
}

double cross_entropy(std::span<const double> truth, std::span<const double> probs) {
  if (truth.size() != probs.size()) {
    throw std::invalid_argument("cross_entropy: truth has length " + std::to_string(truth.size()) +
                                ", probabilities " + std::to_string(probs.size()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0.0) loss -= truth[i] * std::log(std::max(probs[i], kLogEpsilon));
  }
  return loss;
}

std::vector<double> softmax_cross_entropy_grad(std::span<const double> truth, std::span<const double> probs) {
  std::vector<double> d(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) d[i] = probs[i] - truth[i];
  return d;
}

std::vector<double> normalized_sigmoid_cross_entropy_grad(std::span<const double> truth,
                                                          std::span<const double> logits) {
  double sig_sum = 0.0;
  double truth_sum = 0.0;
  std::vector<double> sig(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    sig[i] = sigmoid(logits[i]);
    sig_sum += sig[i];
    truth_sum += truth[i];
  }
  std::vector<double> d(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    const double slope = sig[j] * (1.0 - sig[j]);
    d[j] = truth_sum * slope / sig_sum - truth[j] * (1.0 - sig[j]);
  }
  return d;
}

}  // namespace bloom::nn
