#include <doctest.h>

#include <numeric>

#include <omp.h>

#include "bloom/train.hpp"
#include "support.hpp"

using namespace bloom;

namespace {

struct Fixture {
  EncodedSet data;
  ModelParams params;
};

Fixture make(Architecture arch) {
  const auto ds = testing::reference_corpus();
  TrainingConfig cfg;
  cfg.architecture = arch;
  std::vector<std::string> texts;
  for (const auto& r : ds.records) texts.push_back(r.text);
  const auto vocab = fit_tokenizer(texts, cfg.tokenizer());
  return {encode_dataset(ds, vocab, cfg.task, cfg.maxlen), init_params(cfg, vocab.embedding_rows())};
}

}  // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  for (auto arch : {Architecture::Cnn, Architecture::Lstm}) {
    const auto f = make(arch);
    std::vector<std::size_t> batch(64);
    std::iota(batch.begin(), batch.end(), 100);
    const DropoutConfig dropout{0.7, 0.7, 0.7};
    const auto s = kernels::batch_gradient_serial(f.params, f.data, batch, dropout, nn::Mode::Train, 42, 3);
    const auto p = kernels::batch_gradient_parallel(f.params, f.data, batch, dropout, nn::Mode::Train, 42, 3);
    CHECK(s.loss_sum == p.loss_sum);
    CHECK(s.grad_sum == p.grad_sum);

    const auto ps = kernels::predict_all_serial(f.params, f.data.inputs);
    const auto pp = kernels::predict_all_parallel(f.params, f.data.inputs);
    CHECK(ps == pp);
  }
  omp_set_num_threads(saved);
}

TEST_CASE("dropout streams differ between epochs") {
  const auto f = make(Architecture::Cnn);
  std::vector<std::size_t> batch{1, 2, 3, 4};
  const DropoutConfig dropout{0.7, 0.0, 0.0};
  const auto a = kernels::batch_gradient_serial(f.params, f.data, batch, dropout, nn::Mode::Train, 42, 1);
  const auto b = kernels::batch_gradient_serial(f.params, f.data, batch, dropout, nn::Mode::Train, 42, 2);
  CHECK(a.loss_sum != b.loss_sum);
}
