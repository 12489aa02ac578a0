#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "bloom/corpus.hpp"
#include "bloom/model.hpp"
#include "bloom/train.hpp"

namespace bloom::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries = 0;
  std::string worst;  // "tensor[index]: analytic vs numeric"
};

/// Compares model_backward against central differences of the infer-mode
/// loss for every parameter entry.
GradCheckResult check_gradients(const ModelParams& params, std::span<const std::int32_t> seq,
                                std::span<const double> truth, double h = 1e-5);

/// Small CNN on an 8x5 embedded input and a small LSTM (maxlen 6, emb 5,
/// units 4), with non-zero biases so every tensor carries gradient.
ModelParams toy_cnn(OutputActivation output, std::uint64_t seed);
ModelParams toy_lstm(std::uint64_t seed);

/// 24 distinct synthetic questions, 4 per cognitive class.
CorpusDataset overfit_corpus();

/// Config for the overfit oracle: dropout off, batch 8, 200 epochs.
TrainingConfig overfit_config(Architecture arch);

/// The seeded 844-question corpus with the published marginals.
CorpusDataset reference_corpus();

/// Fresh empty directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace bloom::testing
