#include "bloom/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "bloom/corpus.hpp"
#include "bloom/error.hpp"
#include "bloom/evalreport.hpp"
#include "bloom/model_io.hpp"
#include "bloom/text_util.hpp"
#include "bloom/train.hpp"

namespace bloom::cli {

namespace {

std::string kebab(std::string_view key) {
  std::string s(key);
  for (auto& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

DistributionTable parse_counts(const std::string& spec) {
  if (ascii_lower(spec) == "table1") return table1_distribution();
  const std::string text = read_text_file(spec);
  std::vector<std::int64_t> values;
  for (const auto& raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, ',');
    if (!cols.empty() && parse_cognitive(cols[0])) continue;  // header row of label names
    for (const auto& c : cols) {
      const double v = parse_double(c);
      if (v < 0 || v != std::floor(v)) throw ValidationError("counts must be non-negative integers, got '" + c + "'");
      values.push_back(static_cast<std::int64_t>(v));
    }
  }
  if (values.size() != kNumCognitive + kNumKnowledge) {
    throw ValidationError(spec + ": expected 9 counts (Remember..Create, Factual..Procedural), got " +
                          std::to_string(values.size()));
  }
  DistributionTable t;
  for (std::size_t i = 0; i < kNumCognitive; ++i) t.cognitive[i] = values[i];
  for (std::size_t j = 0; j < kNumKnowledge; ++j) t.knowledge[j] = values[kNumCognitive + j];
  t.total = 0;
  for (auto c : t.cognitive) t.total += c;
  return t;
}

void print_distribution(std::ostream& out, const DistributionTable& t) {
  out << "Cognitive process\n";
  for (std::size_t i = 0; i < kNumCognitive; ++i) {
    char line[64];
    std::snprintf(line, sizeof(line), "  %-12s %6lld\n", std::string(class_name(Task::Cognitive, i)).c_str(),
                  static_cast<long long>(t.cognitive[i]));
    out << line;
  }
  out << "Knowledge dimension\n";
  for (std::size_t j = 0; j < kNumKnowledge; ++j) {
    char line[64];
    std::snprintf(line, sizeof(line), "  %-12s %6lld\n", std::string(class_name(Task::Knowledge, j)).c_str(),
                  static_cast<long long>(t.knowledge[j]));
    out << line;
  }
  out << "Total " << t.total << '\n';
}

SavedModel load_checked_model(const std::string& model_path, const std::string& vocab_path) {
  SavedModel model = load_model(model_path);
  if (!vocab_path.empty()) {
    const Vocabulary vocab = Vocabulary::load(vocab_path);
    if (vocab.hash() != model.vocab.hash()) {
      throw ValidationError("vocabulary '" + vocab_path + "' does not match the one model '" + model_path +
                            "' was trained with");
    }
  }
  return model;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classify exam questions by Bloom cognitive process and knowledge dimension", "bloom"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic question corpus");
  std::string counts_spec;
  std::uint64_t synth_seed = 42;
  std::string synth_out;
  synth->add_option("--counts", counts_spec, "'table1' or a CSV file with 9 counts (6 cognitive, 3 knowledge)")
      ->required();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output corpus (.csv or .jsonl)")->required();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print the class distribution of a corpus");
  std::string inspect_corpus;
  inspect->add_option("--corpus", inspect_corpus, "Corpus file (.csv or .jsonl)")->required();

  // split
  auto* split_cmd = app.add_subcommand("split", "Stratified train/test split");
  std::string split_corpus;
  double split_ratio = 0.7;
  std::uint64_t split_seed = 42;
  std::string split_stratify = "cognitive";
  std::string out_train;
  std::string out_test;
  split_cmd->add_option("--corpus", split_corpus, "Corpus file")->required();
  split_cmd->add_option("--ratio", split_ratio, "Training fraction in (0,1)")->capture_default_str();
  split_cmd->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--stratify", split_stratify, "Label axis to stratify by: cognitive | knowledge")
      ->capture_default_str();
  split_cmd->add_option("--out-train", out_train, "Training split output")->required();
  split_cmd->add_option("--out-test", out_test, "Test split output")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a CNN or LSTM classifier");
  std::string train_path;
  std::string test_path;
  std::string config_path;
  std::string model_out;
  std::string history_out;
  std::string curves_out;
  std::string vocab_out;
  train_cmd->add_option("--train", train_path, "Training corpus")->required();
  train_cmd->add_option("--test", test_path, "Test corpus")->required();
  train_cmd->add_option("--config", config_path, "key=value config file (flags override it)");
  train_cmd->add_option("--model-out", model_out, "Where to write the trained model");
  train_cmd->add_option("--history-out", history_out, "Per-epoch history (config comments + curve CSV)");
  train_cmd->add_option("--curves-out", curves_out, "Per-epoch curve CSV only");
  train_cmd->add_option("--vocab-out", vocab_out, "Where to write the fitted vocabulary");
  const TrainingConfig defaults;
  std::map<std::string, std::string> key_flags;
  std::map<std::string, CLI::Option*> key_opts;
  bool fit_on_all_flag = false;
  const auto default_values = defaults.to_key_values();
  for (const auto& [key, help] : config_keys()) {
    std::string def;
    for (const auto& [k, v] : default_values) {
      if (k == key) def = v;
    }
    const std::string k(key);
    if (k == "fit_on_all") {
      key_opts[k] = train_cmd->add_flag("--fit-on-all", fit_on_all_flag, std::string(help) + " (default false)");
      continue;
    }
    std::string names = "--" + kebab(key);
    if (k == "architecture") names = "--arch,--architecture";
    key_opts[k] = train_cmd->add_option(names, key_flags[k], std::string(help))->default_str(def);
  }

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Accuracy, loss, and confusion matrix of a model on a corpus");
  std::string eval_model;
  std::string eval_corpus;
  std::string eval_vocab;
  eval_cmd->add_option("--model", eval_model, "Model file")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "Labeled corpus")->required();
  eval_cmd->add_option("--vocab", eval_vocab, "Vocabulary file to check against the model");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Classify one question");
  std::string predict_model;
  std::string question;
  std::string predict_vocab;
  predict_cmd->add_option("--model", predict_model, "Model file")->required();
  predict_cmd->add_option("--question", question, "Question text")->required();
  predict_cmd->add_option("--vocab", predict_vocab, "Vocabulary file to check against the model");

  // report
  auto* report_cmd = app.add_subcommand("report", "Comparative table over training histories");
  std::vector<std::string> history_paths;
  bool best_epoch = false;
  std::string report_format = "text";
  report_cmd->add_option("--histories", history_paths, "History files written by train --history-out")
      ->required()
      ->expected(1, -1);
  report_cmd->add_flag("--best-epoch", best_epoch, "Use the max-test-accuracy epoch instead of the last (default false)");
  report_cmd->add_option("--format", report_format, "text | csv")->capture_default_str();

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());  // CLI11 consumes a reversed vector
  try {
    app.parse(argv_tail);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*synth) {
      const auto dist = parse_counts(counts_spec);
      const auto ds = generate_synthetic_corpus(dist, synth_seed);
      write_corpus(ds, synth_out, format_from_path(synth_out));
      out << "wrote " << ds.size() << " questions to " << synth_out << '\n';
    } else if (*inspect) {
      const auto ds = parse_corpus(inspect_corpus, format_from_path(inspect_corpus));
      out << "Corpus " << inspect_corpus << '\n';
      print_distribution(out, class_distribution(ds));
    } else if (*split_cmd) {
      const auto ds = parse_corpus(split_corpus, format_from_path(split_corpus));
      const auto [train, test] = split_train_test(ds, split_ratio, split_seed, parse_task(split_stratify));
      write_corpus(train, out_train, format_from_path(out_train));
      write_corpus(test, out_test, format_from_path(out_test));
      out << "train " << train.size() << " -> " << out_train << '\n';
      out << "test " << test.size() << " -> " << out_test << '\n';
    } else if (*train_cmd) {
      TrainingConfig config = config_path.empty() ? TrainingConfig{} : TrainingConfig::load(config_path);
      for (const auto& [key, opt] : key_opts) {
        if (opt->count() == 0) continue;
        if (key == "fit_on_all") config.fit_on_all = fit_on_all_flag;
        else config.set(key, key_flags[key]);
      }
      config.validate();
      const auto train = parse_corpus(train_path, format_from_path(train_path));
      const auto test = parse_corpus(test_path, format_from_path(test_path));
      const FitResult result = fit(train, test, config);
      for (const auto& e : result.history.epochs) {
        out << "epoch " << e.epoch << "/" << config.epochs << "  train_acc " << fixed(e.train_accuracy, 4)
            << "  train_loss " << fixed(e.train_loss, 4) << "  test_acc " << fixed(e.test_accuracy, 4)
            << "  test_loss " << fixed(e.test_loss, 4) << '\n';
      }
      if (!model_out.empty()) save_model(result.model, model_out);
      if (!history_out.empty()) write_history(result.history, history_out);
      if (!curves_out.empty()) export_curves(result.history, curves_out);
      if (!vocab_out.empty()) result.model.vocab.save(vocab_out);
    } else if (*eval_cmd) {
      const SavedModel model = load_checked_model(eval_model, eval_vocab);
      const auto ds = parse_corpus(eval_corpus, format_from_path(eval_corpus));
      const Evaluation ev = evaluate(model, ds);
      out << "samples " << ev.confusion.total() << '\n';
      out << "accuracy " << fixed(ev.accuracy, 6) << '\n';
      out << "loss " << fixed(ev.loss, 6) << '\n';
      out << ev.confusion.render();
    } else if (*predict_cmd) {
      if (trim(question).empty()) throw ValidationError("empty question");
      const SavedModel model = load_checked_model(predict_model, predict_vocab);
      const Prediction p = predict(model, question);
      if (p.all_padding) err << "warning: no word of the question is in the model vocabulary\n";
      out << "task " << to_string(model.task) << '\n';
      out << "label " << p.label << '\n';
      out << "confidence " << fixed(p.confidence, 6) << '\n';
      for (std::size_t i = 0; i < p.probs.size(); ++i) {
        out << "  " << class_name(model.task, i) << ' ' << fixed(p.probs[i], 6) << '\n';
      }
    } else if (*report_cmd) {
      std::vector<TrainHistory> histories;
      for (const auto& path : history_paths) histories.push_back(read_history(path));
      const auto report = comparative_report(histories, best_epoch ? EpochPick::BestTest : EpochPick::Final);
      const std::string fmt = ascii_lower(report_format);
      if (fmt == "csv") out << report.render_csv();
      else if (fmt == "text") out << report.render_text();
      else throw ValidationError("unknown report format '" + report_format + "' (expected text or csv)");
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bloom::cli
