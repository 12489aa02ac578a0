#include <doctest.h>

#include <cmath>

#include "bloom/error.hpp"
#include "bloom/evalreport.hpp"
#include "bloom/text_util.hpp"
#include "support.hpp"

using namespace bloom;

namespace {

TrainHistory history(Architecture arch, Task task, std::vector<EpochMetrics> epochs) {
  TrainHistory h;
  h.config.architecture = arch;
  h.config.task = task;
  h.epochs = std::move(epochs);
  return h;
}

}  // namespace

TEST_CASE("evaluation from probabilities") {
  const std::vector<Probabilities> probs{{1, 0, 0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const std::vector<std::size_t> labels{0, 0};
  const auto ev = evaluate_probabilities(probs, labels, Task::Knowledge);
  CHECK(ev.loss == doctest::Approx(std::log(3.0) / 2.0));
  CHECK(ev.loss == doctest::Approx(0.5493).epsilon(1e-4));
  CHECK(ev.accuracy == 1.0);
  CHECK(ev.confusion.diagonal() == ev.confusion.total());

  const std::vector<Probabilities> four{{0.9, 0.1, 0}, {0.2, 0.8, 0}, {0.9, 0.1, 0}, {0, 0.1, 0.9}};
  const std::vector<std::size_t> truth{0, 1, 2, 1};
  const auto half = evaluate_probabilities(four, truth, Task::Knowledge);
  CHECK(half.accuracy == 0.5);
  CHECK(half.confusion.at(2, 0) == 1);
  CHECK(half.confusion.at(1, 2) == 1);
  CHECK(half.confusion.row_sum(1) == 2);
  CHECK(half.confusion.column_sum(0) == 2);

  CHECK_THROWS_AS(evaluate_probabilities({}, {}, Task::Knowledge), ValidationError);
}

TEST_CASE("evaluate on a trained model: accuracy and confusion agree with the data") {
  const auto ds = testing::reference_corpus();
  const auto [train, test] = split_train_test(ds, 0.7, 42, Task::Knowledge);
  TrainingConfig cfg;
  cfg.task = Task::Knowledge;
  cfg.architecture = Architecture::Lstm;
  cfg.epochs = 2;
  const auto model = fit(train, test, cfg).model;
  const auto ev = evaluate(model, test);
  const auto dist = class_distribution(test);
  CHECK(ev.confusion.total() == static_cast<std::int64_t>(test.size()));
  CHECK(ev.accuracy == doctest::Approx(static_cast<double>(ev.confusion.diagonal()) / static_cast<double>(test.size())));
  for (std::size_t k = 0; k < kNumKnowledge; ++k) CHECK(ev.confusion.row_sum(k) == dist.knowledge[k]);
  CHECK(ev.confusion.render().find("Procedural") != std::string::npos);
  CHECK_THROWS_AS(evaluate(model, CorpusDataset{}), ValidationError);
}

TEST_CASE("percent formatting") {
  CHECK(format_percent(0.75) == "75%");
  CHECK(format_percent(0.8889) == "88.89%");
  CHECK(format_percent(0.44) == "44%");
  CHECK(format_percent(1.0) == "100%");
  CHECK(format_percent(0.9444) == "94.44%");
}

TEST_CASE("report reproduces the comparative table") {
  const std::vector<TrainHistory> grid{
      history(Architecture::Lstm, Task::Knowledge, {{1, 0.9444, 0.55, 0.44, 0.70}}),
      history(Architecture::Cnn, Task::Cognitive, {{1, 0.75, 0.46, 0.80, 0.47}}),
      history(Architecture::Cnn, Task::Knowledge, {{1, 0.8889, 0.33, 0.6667, 0.66}}),
      history(Architecture::Lstm, Task::Cognitive, {{1, 0.77, 0.57, 0.71, 0.63}}),
  };
  const auto text = comparative_report(grid).render_text();
  const std::string expected =
      "Model   Cognitive Process                       Knowledge Dimension\n"
      "        Accuracy            Loss                Accuracy            Loss\n"
      "        Training  Testing   Training  Testing   Training  Testing   Training  Testing\n"
      "CNN     75%       80%       0.46      0.47      88.89%    66.67%    0.33      0.66\n"
      "LSTM    77%       71%       0.57      0.63      94.44%    44%       0.55      0.70\n";
  CHECK(text == expected);
  CHECK(comparative_report(grid).render_text() == text);

  const auto csv = comparative_report(grid).render_csv();
  CHECK(csv.find("CNN,0.750000,0.800000,0.460000,0.470000,0.888900,0.666700,0.330000,0.660000") != std::string::npos);
}

TEST_CASE("report shape: single history, duplicates, epoch pick") {
  const auto one = comparative_report(std::vector{history(Architecture::Lstm, Task::Cognitive, {{1, 0.5, 1, 0.5, 1}})});
  CHECK(one.rows == std::vector{Architecture::Lstm});
  const auto text = one.render_text();
  CHECK(text.find("CNN") == std::string::npos);
  CHECK(text.find("LSTM    50%       50%       1.00      1.00      -         -         -         -") != std::string::npos);

  const std::vector dup{history(Architecture::Cnn, Task::Cognitive, {{1, 0, 0, 0, 0}}),
                        history(Architecture::Cnn, Task::Cognitive, {{1, 0, 0, 0, 0}})};
  CHECK_THROWS_AS(comparative_report(dup), ValidationError);
  CHECK_THROWS_AS(comparative_report(std::vector{history(Architecture::Cnn, Task::Cognitive, {})}), ValidationError);

  const std::vector multi{history(Architecture::Cnn, Task::Cognitive,
                                  {{1, 0.5, 1, 0.6, 1}, {2, 0.7, 1, 0.9, 1}, {3, 0.8, 1, 0.7, 1}})};
  CHECK(comparative_report(multi).cells[0][0]->test_accuracy == 0.7);
  CHECK(comparative_report(multi, EpochPick::BestTest).cells[0][0]->test_accuracy == 0.9);
}

TEST_CASE("curves: 21 lines for 20 epochs, values round trip") {
  TrainHistory h = history(Architecture::Cnn, Task::Cognitive, {});
  Rng rng(5);
  for (std::size_t e = 1; e <= 20; ++e) {
    h.epochs.push_back({e, rng.uniform(), rng.uniform(0, 3), rng.uniform(), rng.uniform(0, 3)});
  }
  testing::TempDir dir("curves");
  export_curves(h, dir / "c.csv");
  const auto text = read_text_file(dir / "c.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 21);
  CHECK(text.starts_with("epoch,train_accuracy,train_loss,test_accuracy,test_loss\n"));

  const auto back = parse_curves(text);
  REQUIRE(back.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(back[i].epoch == i + 1);
    CHECK(std::abs(back[i].train_accuracy - h.epochs[i].train_accuracy) <= 1e-6);
    CHECK(std::abs(back[i].train_loss - h.epochs[i].train_loss) <= 1e-6);
    CHECK(std::abs(back[i].test_accuracy - h.epochs[i].test_accuracy) <= 1e-6);
    CHECK(std::abs(back[i].test_loss - h.epochs[i].test_loss) <= 1e-6);
  }

  h.config.learning_rate = 0.0123;
  const auto parsed = parse_history(render_history(h));
  CHECK(parsed.config == h.config);
  CHECK(parsed.epochs.size() == 20);
  CHECK_THROWS_AS(parse_history(text), ValidationError);
  CHECK_THROWS_AS(export_curves(history(Architecture::Cnn, Task::Cognitive, {}), dir / "e.csv"), ValidationError);
  CHECK_THROWS_AS(export_curves(h, "/nonexistent/dir/c.csv"), IoError);
}
