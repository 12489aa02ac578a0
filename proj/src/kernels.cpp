#include <omp.h>

#include "bloom/textpipe.hpp"
#include "bloom/train.hpp"

namespace bloom::kernels {

namespace {

double sample_gradient(const ModelParams& params, const EncodedSet& data, std::size_t row,
                       const DropoutConfig& dropout, nn::Mode mode, std::uint64_t seed, std::uint64_t epoch,
                       ModelParams& grad) {
  Rng rng(mix_seed(seed, epoch, row));
  const auto truth = encode_label(data.task, data.labels[row]);
  return model_backward(params, data.inputs.row(row), truth, dropout, mode, rng, grad).loss;
}

void add_into(ModelParams& sum, const ModelParams& term) {
  for_each_tensor_pair(sum, term, [](std::string_view, NumArray& a, const NumArray& b) {
    double* dst = a.raw();
    const double* src = b.raw();
    for (std::size_t i = 0; i < a.size(); ++i) dst[i] += src[i];
  });
}

}  // namespace

BatchGradient batch_gradient_serial(const ModelParams& params, const EncodedSet& data,
                                    std::span<const std::size_t> batch, const DropoutConfig& dropout, nn::Mode mode,
                                    std::uint64_t seed, std::uint64_t epoch) {
  BatchGradient out{0.0, zeros_like(params)};
  ModelParams scratch = zeros_like(params);
  for (const std::size_t row : batch) {
    set_zero(scratch);
    out.loss_sum += sample_gradient(params, data, row, dropout, mode, seed, epoch, scratch);
    add_into(out.grad_sum, scratch);
  }
  return out;
}

BatchGradient batch_gradient_parallel(const ModelParams& params, const EncodedSet& data,
                                      std::span<const std::size_t> batch, const DropoutConfig& dropout,
                                      nn::Mode mode, std::uint64_t seed, std::uint64_t epoch) {
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<ModelParams> per_sample(batch.size(), zeros_like(params));
  std::vector<double> losses(batch.size(), 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    losses[i] = sample_gradient(params, data, batch[i], dropout, mode, seed, epoch, per_sample[i]);
  }

  BatchGradient out{0.0, zeros_like(params)};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.loss_sum += losses[i];
    add_into(out.grad_sum, per_sample[i]);
  }
  return out;
}

std::vector<Probabilities> predict_all_serial(const ModelParams& params, const SequenceMatrix& inputs) {
  std::vector<Probabilities> out(inputs.rows());
  Rng unused(0);
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    out[r] = model_forward(params, inputs.row(r), {}, nn::Mode::Infer, unused);
  }
  return out;
}

std::vector<Probabilities> predict_all_parallel(const ModelParams& params, const SequenceMatrix& inputs) {
  std::vector<Probabilities> out(inputs.rows());
  const auto n = static_cast<std::ptrdiff_t>(inputs.rows());
#pragma omp parallel
  {
    Rng unused(0);
#pragma omp for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      out[r] = model_forward(params, inputs.row(static_cast<std::size_t>(r)), {}, nn::Mode::Infer, unused);
    }
  }
  return out;
}

}  // namespace bloom::kernels
