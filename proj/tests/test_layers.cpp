#include <doctest.h>

#include <cmath>

#include "bloom/layers.hpp"
#include "bloom/model.hpp"
#include "bloom/textpipe.hpp"
#include "support.hpp"

using namespace bloom;
using namespace bloom::nn;

TEST_CASE("embedding lookup and scatter-add") {
  NumArray table({4, 3});
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = static_cast<double>(i);
  const std::vector<std::int32_t> pad{0, 0, 0};
  const auto out = embedding_forward(table, pad);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t e = 0; e < 3; ++e) CHECK(out(t, e) == table(0, e));
  }

  NumArray identity({3, 3});
  for (std::size_t i = 0; i < 3; ++i) identity(i, i) = 1.0;
  const std::vector<std::int32_t> two{2};
  const auto e2 = embedding_forward(identity, two);
  CHECK(e2 == NumArray({1, 3}, {0, 0, 1}));

  NumArray d_out({3, 3}, 1.0);
  NumArray d_table({4, 3});
  const std::vector<std::int32_t> seq{1, 1, 3};
  embedding_backward(d_out, seq, d_table);
  CHECK(d_table(1, 0) == 2.0);
  CHECK(d_table(3, 2) == 1.0);
  CHECK(d_table(0, 0) == 0.0);

  const std::vector<std::int32_t> bad{4};
  CHECK_THROWS_AS(embedding_forward(table, bad), std::out_of_range);
}

TEST_CASE("spatial dropout") {
  NumArray x({5, 4});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 + static_cast<double>(i);
  Rng rng(1);
  CHECK(spatial_dropout(x, 0.0, Mode::Train, rng) == x);
  CHECK(spatial_dropout(x, 0.0, Mode::Infer, rng) == x);
  CHECK(spatial_dropout(x, 0.7, Mode::Infer, rng) == x);

  // whole channels are either dropped or uniformly scaled
  const auto y = spatial_dropout(x, 0.5, Mode::Train, rng);
  for (std::size_t e = 0; e < 4; ++e) {
    const double ratio = y(0, e) / x(0, e);
    CHECK((ratio == 0.0 || ratio == doctest::Approx(2.0)));
    for (std::size_t t = 1; t < 5; ++t) CHECK(y(t, e) / x(t, e) == doctest::Approx(ratio));
  }

  Rng mc(2024);
  const auto mask = channel_dropout_mask(10000, 0.7, Mode::Train, mc);
  const auto zeros = std::count(mask.begin(), mask.end(), 0.0);
  CHECK(std::abs(static_cast<double>(zeros) / 10000.0 - 0.7) <= 0.02);
  for (double m : mask) CHECK((m == 0.0 || m == doctest::Approx(1.0 / 0.3)));

  CHECK_THROWS_AS(channel_dropout_mask(3, 1.0, Mode::Train, mc), std::invalid_argument);
}

TEST_CASE("conv1d + global max") {
  NumArray embedded({5, 3});
  const double ch0[] = {-1.0, 2.0, 0.5, 3.0, -4.0};
  for (std::size_t t = 0; t < 5; ++t) {
    embedded(t, 0) = ch0[t];
    embedded(t, 1) = 10.0;
    embedded(t, 2) = -10.0;
  }
  NumArray zero_k({2, 3, 3});
  NumArray zero_b({2});
  CHECK(conv1d_globalmax_forward({zero_k, zero_b}, embedded).features == std::vector<double>{0.0, 0.0});

  NumArray selector({1, 1, 3});
  selector(0, 0, 0) = 1.0;
  NumArray bias({1});
  const auto trace = conv1d_globalmax_forward({selector, bias}, embedded);
  CHECK(trace.features[0] == 3.0);
  CHECK(trace.argmax[0] == 3);

  // a negative maximum is clipped by the ReLU
  NumArray neg({1, 1, 3});
  neg(0, 0, 2) = 1.0;
  CHECK(conv1d_globalmax_forward({neg, bias}, embedded).features[0] == 0.0);
}

TEST_CASE("lstm with zero parameters outputs zeros") {
  NumArray w({4, 10, 5});
  NumArray u({4, 10, 10});
  NumArray b({4, 10});
  NumArray x({7, 5});
  Rng rng(3);
  for (auto& v : x.data()) v = rng.uniform(-2, 2);
  LstmTrace trace;
  const auto h = lstm_forward({w, u, b}, x, {}, Mode::Infer, rng, &trace);
  CHECK(h.size() == 10);
  for (double v : h) CHECK(v == 0.0);
  for (double v : trace.c.data()) CHECK(v == 0.0);
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t u_ = 0; u_ < 10; ++u_) {
      CHECK(trace.gates(t, kInputGate, u_) == 0.5);
      CHECK(trace.gates(t, kCellGate, u_) == 0.0);
    }
  }
}

TEST_CASE("softmax invariants over random logits") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> logits(2 + rng.below(8));
    for (auto& v : logits) v = rng.uniform(-50, 50);
    const auto s = softmax(logits);
    double sum = 0.0;
    for (double v : s) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    const auto arg_s = std::max_element(s.begin(), s.end()) - s.begin();
    const auto arg_l = std::max_element(logits.begin(), logits.end()) - logits.begin();
    CHECK(arg_s == arg_l);
  }
  const auto u = softmax(std::vector<double>{0, 0, 0});
  for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto big = softmax(std::vector<double>{1000, 0, 0});
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(std::isfinite(big[1]));
}

TEST_CASE("cross entropy") {
  const std::vector<double> truth{1, 0, 0};
  CHECK(std::abs(cross_entropy(truth, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) - std::log(3.0)) < 1e-9);
  CHECK(cross_entropy(truth, std::vector<double>{1, 0, 0}) == 0.0);
  CHECK(cross_entropy(truth, std::vector<double>{0, 0.5, 0.5}) == doctest::Approx(-std::log(1e-12)));
  CHECK(cross_entropy(truth, std::vector<double>{0, 0.5, 0.5}) == doctest::Approx(27.631021115928547));
  CHECK_THROWS_AS(cross_entropy(truth, std::vector<double>{0.5, 0.5}), std::invalid_argument);

  // probs == truth leaves no gradient at the output
  for (double g : softmax_cross_entropy_grad(truth, truth)) CHECK(g == 0.0);
}

TEST_CASE("normalized sigmoid sums to one") {
  const auto s = normalized_sigmoid(std::vector<double>{-3, 0, 2, 40});
  double sum = 0.0;
  for (double v : s) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cnn gradients match central differences") {
  const std::vector<std::int32_t> seq{0, 0, 3, 7, 1, 11, 4, 3};  // 8 tokens, emb 5 -> 8x5 input
  for (auto output : {OutputActivation::Softmax, OutputActivation::Sigmoid}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto params = testing::toy_cnn(output, seed);
      const auto truth = encode_label(Task::Cognitive, seed % 6);
      const auto r = testing::check_gradients(params, seq, truth);
      INFO(r.worst);
      CHECK(r.entries == parameter_count(params));
      CHECK(r.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("lstm gradients match central differences") {
  const std::vector<std::int32_t> seq{0, 2, 5, 9, 5, 1};
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto params = testing::toy_lstm(seed);
    const auto truth = encode_label(Task::Knowledge, seed % 3);
    const auto r = testing::check_gradients(params, seq, truth);
    INFO(r.worst);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("train-mode backward uses the forward pass's dropout masks") {
  const auto params = testing::toy_lstm(5);
  const std::vector<std::int32_t> seq{1, 2, 3, 4, 5, 6};
  const DropoutConfig dropout{0.3, 0.2, 0.4};
  Rng a(77);
  const auto probs = model_forward(params, seq, dropout, Mode::Train, a);
  Rng b(77);
  ModelParams grads = zeros_like(params);
  const auto r = model_backward(params, seq, encode_label(Task::Knowledge, 1), dropout, Mode::Train, b, grads);
  CHECK(r.probs == probs);
  CHECK(a.next() == b.next());
}

TEST_CASE("model forward gives a distribution and is deterministic in infer mode") {
  for (const auto& params : {testing::toy_cnn(OutputActivation::Softmax, 9), testing::toy_lstm(9)}) {
    const std::vector<std::int32_t> seq{0, 0, 1, 2, 3, 4};
    Rng rng(1);
    const auto p1 = model_forward(params, seq, {0.5, 0.5, 0.5}, Mode::Infer, rng);
    const auto p2 = model_forward(params, seq, {0.5, 0.5, 0.5}, Mode::Infer, rng);
    CHECK(p1 == p2);
    double sum = 0.0;
    for (double v : p1) sum += v;
    CHECK(sum == doctest::Approx(1.0));
  }
}
