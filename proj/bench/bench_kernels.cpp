// Times the serial reference kernels against the OpenMP ones on the
// reference corpus. Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include <omp.h>

#include "bloom/corpus.hpp"
#include "bloom/train.hpp"

using namespace bloom;

namespace {

template <typename F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  const auto ds = generate_synthetic_corpus(table1_distribution(), 42);
  std::vector<std::string> texts;
  for (const auto& r : ds.records) texts.push_back(r.text);

  std::printf("threads: %d, samples: %zu, repeats: %d\n", omp_get_max_threads(), ds.size(), repeats);
  std::printf("%-6s %-16s %12s %12s %8s %s\n", "arch", "kernel", "serial ms", "parallel ms", "speedup", "identical");
  for (auto arch : {Architecture::Cnn, Architecture::Lstm}) {
    TrainingConfig cfg;
    cfg.architecture = arch;
    const auto vocab = fit_tokenizer(texts, cfg.tokenizer());
    const auto data = encode_dataset(ds, vocab, cfg.task, cfg.maxlen);
    const auto params = init_params(cfg, vocab.embedding_rows());
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);

    kernels::BatchGradient s;
    kernels::BatchGradient p;
    const double gs = best_of(repeats, [&] {
      s = kernels::batch_gradient_serial(params, data, all, cfg.dropout(), nn::Mode::Train, cfg.seed, 1);
    });
    const double gp = best_of(repeats, [&] {
      p = kernels::batch_gradient_parallel(params, data, all, cfg.dropout(), nn::Mode::Train, cfg.seed, 1);
    });
    const bool grad_same = s.loss_sum == p.loss_sum && s.grad_sum == p.grad_sum;
    std::printf("%-6s %-16s %12.2f %12.2f %8.2f %s\n", std::string(to_string(arch)).c_str(), "batch_gradient", gs, gp,
                gs / gp, grad_same ? "yes" : "NO");

    std::vector<Probabilities> ps;
    std::vector<Probabilities> pp;
    const double fs = best_of(repeats, [&] { ps = kernels::predict_all_serial(params, data.inputs); });
    const double fp = best_of(repeats, [&] { pp = kernels::predict_all_parallel(params, data.inputs); });
    std::printf("%-6s %-16s %12.2f %12.2f %8.2f %s\n", std::string(to_string(arch)).c_str(), "predict_all", fs, fp,
                fs / fp, ps == pp ? "yes" : "NO");
  }
  return 0;
}
