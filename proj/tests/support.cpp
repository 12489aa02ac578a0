#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>

#include <unistd.h>

namespace bloom::testing {

namespace {

double infer_loss(const ModelParams& params, std::span<const std::int32_t> seq, std::span<const double> truth) {
  Rng unused(0);
  const auto probs = model_forward(params, seq, {}, nn::Mode::Infer, unused);
  return nn::cross_entropy(truth, probs);
}

void jitter(ModelParams& params, std::uint64_t seed, double scale) {
  Rng rng(seed);
  for_each_tensor(params, [&](std::string_view, NumArray& t) {
    for (auto& v : t.data()) v += rng.uniform(-scale, scale);
  });
}

}  // namespace

GradCheckResult check_gradients(const ModelParams& params, std::span<const std::int32_t> seq,
                                std::span<const double> truth, double h) {
  ModelParams analytic = zeros_like(params);
  Rng unused(0);
  model_backward(params, seq, truth, {}, nn::Mode::Infer, unused, analytic);

  ModelParams probe = params;
  std::vector<std::pair<std::string, NumArray*>> tensors;
  for_each_tensor(probe, [&](std::string_view name, NumArray& t) { tensors.emplace_back(std::string(name), &t); });
  std::vector<const NumArray*> grads;
  for_each_tensor(analytic, [&](std::string_view, const NumArray& t) { grads.push_back(&t); });

  GradCheckResult result;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    NumArray& t = *tensors[k].second;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double up = infer_loss(probe, seq, truth);
      t[i] = saved - h;
      const double down = infer_loss(probe, seq, truth);
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = (*grads[k])[i];
      // Entries whose gradient is at the finite-difference noise floor are
      // compared absolutely.
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      ++result.entries;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s[%zu]: %.10g vs %.10g", tensors[k].first.c_str(), i, a, numeric);
        result.worst = buf;
      }
    }
  }
  return result;
}

ModelParams toy_cnn(OutputActivation output, std::uint64_t seed) {
  TrainingConfig c;
  c.architecture = Architecture::Cnn;
  c.task = Task::Cognitive;
  c.emb_dim = 5;
  c.maxlen = 8;
  c.kernel_width = 3;
  c.num_filters = 4;
  c.cnn_output = output;
  c.seed = seed;
  ModelParams p = init_params(c, 12);
  jitter(p, mix_seed(seed, 99), 0.3);
  return p;
}

ModelParams toy_lstm(std::uint64_t seed) {
  TrainingConfig c;
  c.architecture = Architecture::Lstm;
  c.task = Task::Knowledge;
  c.emb_dim = 5;
  c.maxlen = 6;
  c.lstm_units = 4;
  c.seed = seed;
  ModelParams p = init_params(c, 10);
  jitter(p, mix_seed(seed, 99), 0.3);
  return p;
}

CorpusDataset overfit_corpus() {
  DistributionTable dist;
  dist.cognitive.fill(20);
  dist.knowledge = {40, 40, 40};
  dist.total = 120;
  const CorpusDataset pool = generate_synthetic_corpus(dist, 7);

  CorpusDataset out;
  out.source = "overfit";
  std::array<int, kNumCognitive> taken{};
  std::set<std::string> seen;
  for (const auto& r : pool.records) {
    auto& n = taken[static_cast<std::size_t>(r.cognitive)];
    if (n == 4 || !seen.insert(r.text).second) continue;
    ++n;
    out.records.push_back(r);
  }
  return out;
}

TrainingConfig overfit_config(Architecture arch) {
  TrainingConfig c;
  c.architecture = arch;
  c.task = Task::Cognitive;
  c.epochs = 200;
  c.batch_size = 8;
  c.spatial_dropout = 0.0;
  c.lstm_dropout = 0.0;
  c.recurrent_dropout = 0.0;
  c.seed = 3;
  return c;
}

CorpusDataset reference_corpus() { return generate_synthetic_corpus(table1_distribution(), 42); }

TempDir::TempDir(std::string_view tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("bloom-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace bloom::testing
