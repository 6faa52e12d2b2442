#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "med/harness.hpp"
#include "med/model.hpp"
#include "med/poet.hpp"

namespace {

using med::Corpus;
using med::Rng;
using med::Sample;
using med::TagPair;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<med::model::Model> load_models(const std::string& spec) {
  std::vector<med::model::Model> models;
  for (const std::string& dir : split_commas(spec)) {
    if (dir.empty())
      throw std::invalid_argument("empty model directory in --model");
    models.push_back(med::model::load_model(dir));
  }
  return models;
}

std::vector<const med::model::Model*> model_ptrs(
    const std::vector<med::model::Model>& models) {
  std::vector<const med::model::Model*> ptrs;
  for (const auto& m : models) ptrs.push_back(&m);
  return ptrs;
}

// Tags may themselves contain commas, so a "--pair S,T" argument is matched
// against the corpus pairs; a tab always separates unambiguously.
TagPair resolve_pair(const Corpus& corpus, const std::string& arg) {
  const std::size_t tab = arg.find('\t');
  if (tab != std::string::npos)
    return {arg.substr(0, tab), arg.substr(tab + 1)};
  std::vector<TagPair> matches;
  for (const TagPair& p : corpus.tag_pairs) {
    if (p.first + "," + p.second == arg) matches.push_back(p);
  }
  if (matches.empty())
    throw std::invalid_argument("--pair does not match any tag pair: " + arg);
  if (matches.size() > 1)
    throw std::invalid_argument(
        "--pair is ambiguous (use a tab between the tags): " + arg);
  return matches[0];
}

void check_predictions_align(const Corpus& data, const Corpus& pred) {
  if (data.size() != pred.size())
    throw std::invalid_argument("prediction file has " +
                                std::to_string(pred.size()) + " rows, data has " +
                                std::to_string(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample& d = data.samples[i];
    const Sample& p = pred.samples[i];
    if (d.source_tag != p.source_tag || d.source_form != p.source_form ||
        d.target_tag != p.target_tag)
      throw std::invalid_argument("prediction row " + std::to_string(i + 1) +
                                  " does not match the data file");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"med: character-level reinflection with edit-tree correction"};
  app.require_subcommand(1);

  // train
  auto* train_cmd =
      app.add_subcommand("train", "train one model over every tag pair");
  std::string train_data, train_config, train_out;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--data", train_data, "training TSV")->required();
  train_cmd->add_option("--config", train_config, "key=value config file");
  auto* train_seed_opt =
      train_cmd->add_option("--seed", train_seed, "seed override");
  train_cmd->add_option("--out", train_out, "model directory to write")
      ->required();
  train_cmd->callback([&] {
    med::model::Config config = train_config.empty()
                                    ? med::model::Config{}
                                    : med::model::Config::from_file(train_config);
    if (train_seed_opt->count() > 0) config.seed = train_seed;
    const Corpus corpus = med::load_tsv(train_data);
    const std::size_t every = config.iterations > 100 ? 100 : 1;
    med::model::Model model = med::model::train(
        corpus, config, [&](std::size_t iter, double loss) {
          if (iter % every == 0 || iter == config.iterations) {
            std::cout << "iteration " << iter << "/" << config.iterations
                      << " loss " << loss << "\n";
          }
        });
    med::model::save_model(model, train_out);
    std::cout << "saved model to " << train_out << "\n";
  });

  // predict
  auto* predict_cmd =
      app.add_subcommand("predict", "predict target forms for a data file");
  std::string predict_model, predict_data, predict_out;
  std::size_t predict_beam = 0;
  std::uint64_t predict_seed = 0;
  predict_cmd
      ->add_option("--model", predict_model,
                   "model directory, comma-separated list for an ensemble")
      ->required();
  predict_cmd->add_option("--data", predict_data, "input TSV")->required();
  predict_cmd->add_option("--out", predict_out, "predictions TSV")->required();
  predict_cmd->add_option("--beam", predict_beam,
                          "beam width override (1 = greedy)");
  predict_cmd->add_option("--seed", predict_seed, "seed for vote ties");
  predict_cmd->callback([&] {
    const auto models = load_models(predict_model);
    const auto ptrs = model_ptrs(models);
    const Corpus data = med::load_tsv(predict_data);
    Rng rng(predict_seed);
    std::vector<std::string> predictions;
    predictions.reserve(data.size());
    for (const Sample& s : data.samples) {
      predictions.push_back(
          med::model::ensemble_predict(ptrs, s, rng, predict_beam));
    }
    med::harness::write_predictions(data, predictions, predict_out);
    std::cout << "wrote " << predictions.size() << " predictions to "
              << predict_out << "\n";
  });

  // poet build / poet apply
  auto* poet_cmd = app.add_subcommand("poet", "edit-tree output correction");
  poet_cmd->require_subcommand(1);

  auto* build_cmd =
      poet_cmd->add_subcommand("build", "collect observed edit trees");
  std::string build_data, build_out;
  build_cmd->add_option("--data", build_data, "training TSV")->required();
  build_cmd->add_option("--out", build_out, "store file to write")->required();
  build_cmd->callback([&] {
    const med::poet::PoetStore store =
        med::poet::build_store(med::load_tsv(build_data));
    med::poet::save_store(store, build_out);
    std::cout << "wrote store with " << store.pair_count() << " tag pairs ("
              << store.total_observations() << " observations) to "
              << build_out << "\n";
  });

  auto* apply_cmd =
      poet_cmd->add_subcommand("apply", "correct a prediction file");
  std::string apply_store, apply_pred, apply_data, apply_out;
  std::uint64_t apply_seed = 0;
  apply_cmd->add_option("--store", apply_store, "store file")->required();
  apply_cmd->add_option("--pred", apply_pred, "predictions TSV")->required();
  apply_cmd->add_option("--data", apply_data, "input TSV the predictions answer")
      ->required();
  apply_cmd->add_option("--out", apply_out, "corrected TSV")->required();
  apply_cmd->add_option("--seed", apply_seed, "seed for tie draws");
  apply_cmd->callback([&] {
    const med::poet::PoetStore store = med::poet::load_store(apply_store);
    const Corpus data = med::load_tsv(apply_data);
    const Corpus pred = med::load_tsv(apply_pred);
    check_predictions_align(data, pred);
    Rng rng(apply_seed);
    std::vector<std::string> corrected;
    corrected.reserve(data.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Sample& s = data.samples[i];
      const std::string rho = pred.samples[i].target_form.value_or("");
      corrected.push_back(med::poet::correct(store, s.source_form,
                                             s.source_tag, s.target_tag, rho,
                                             rng));
      if (corrected.back() != rho) ++changed;
    }
    med::harness::write_predictions(data, corrected, apply_out);
    std::cout << "corrected " << changed << " of " << data.size()
              << " predictions into " << apply_out << "\n";
  });

  // eval
  auto* eval_cmd =
      app.add_subcommand("eval", "score a model or ensemble on a test set");
  std::string eval_model, eval_test, eval_poet, eval_report;
  std::uint64_t eval_seed = 0;
  std::size_t eval_beam = 0;
  eval_cmd
      ->add_option("--model", eval_model,
                   "model directory, comma-separated list for an ensemble")
      ->required();
  eval_cmd->add_option("--test", eval_test, "test TSV with gold forms")
      ->required();
  eval_cmd->add_option("--poet", eval_poet, "store file for output correction");
  eval_cmd->add_option("--report", eval_report, "report JSON to write")
      ->required();
  eval_cmd->add_option("--seed", eval_seed, "seed for vote and tie draws");
  eval_cmd->add_option("--beam", eval_beam, "beam width override (1 = greedy)");
  eval_cmd->callback([&] {
    const auto models = load_models(eval_model);
    const auto ptrs = model_ptrs(models);
    const Corpus test = med::load_tsv(eval_test);
    std::unique_ptr<med::poet::PoetStore> store;
    if (!eval_poet.empty()) {
      store = std::make_unique<med::poet::PoetStore>(
          med::poet::load_store(eval_poet));
    }
    Rng rng(eval_seed);
    const med::harness::EvalReport report =
        med::harness::evaluate(ptrs, test, store.get(), rng, eval_beam);
    med::harness::write_report(report, test, eval_report);
    std::cout << med::harness::report_table(report);
    std::cout << "wrote report to " << eval_report << "\n";
  });

  // folds
  auto* folds_cmd =
      app.add_subcommand("folds", "write rotated train/dev/test folds");
  std::string folds_data, folds_out;
  std::uint64_t folds_seed = 0;
  folds_cmd->add_option("--data", folds_data, "full TSV")->required();
  folds_cmd->add_option("--seed", folds_seed, "shuffle seed");
  folds_cmd->add_option("--out", folds_out, "directory for fold files")
      ->required();
  folds_cmd->callback([&] {
    const med::harness::FoldSet fs =
        med::harness::make_celex_folds(med::load_tsv(folds_data), folds_seed);
    std::filesystem::create_directories(folds_out);
    for (std::size_t i = 0; i < fs.folds.size(); ++i) {
      const std::string stem = folds_out + "/fold" + std::to_string(i);
      med::save_tsv(fs.folds[i].train, stem + ".train.tsv");
      med::save_tsv(fs.folds[i].dev, stem + ".dev.tsv");
      med::save_tsv(fs.folds[i].test, stem + ".test.tsv");
    }
    if (fs.scaled) {
      std::cerr << "warning: folds scaled down (a tag pair has fewer than "
                   "2500 samples)\n";
    }
    std::cout << "wrote " << fs.folds.size() << " folds to " << folds_out
              << "\n";
  });

  // reduce
  auto* reduce_cmd =
      app.add_subcommand("reduce", "subsample training data per tag pair");
  std::string reduce_data, reduce_pair, reduce_out;
  double reduce_fraction = 1.0;
  std::uint64_t reduce_seed = 0;
  reduce_cmd->add_option("--data", reduce_data, "full TSV")->required();
  reduce_cmd->add_option("--pair", reduce_pair,
                         "single tag pair S,T (default: every pair)");
  reduce_cmd->add_option("--fraction", reduce_fraction, "fraction kept, (0,1]")
      ->required();
  reduce_cmd->add_option("--seed", reduce_seed, "shuffle seed");
  reduce_cmd->add_option("--out", reduce_out, "reduced TSV")->required();
  reduce_cmd->callback([&] {
    const Corpus corpus = med::load_tsv(reduce_data);
    const Corpus reduced =
        reduce_pair.empty()
            ? med::harness::reduce_all(corpus, reduce_fraction, reduce_seed)
            : med::harness::reduce_tagpair(corpus,
                                           resolve_pair(corpus, reduce_pair),
                                           reduce_fraction, reduce_seed);
    med::save_tsv(reduced, reduce_out);
    std::cout << "kept " << reduced.size() << " of " << corpus.size()
              << " samples in " << reduce_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "med: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
