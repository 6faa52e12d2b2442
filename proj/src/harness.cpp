#include "med/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace med::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string pair_label(const TagPair& pair) {
  return pair.first + "\t" + pair.second;
}

std::map<TagPair, std::vector<std::size_t>> indices_by_pair(
    const Corpus& corpus) {
  std::map<TagPair, std::vector<std::size_t>> by_pair;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const Sample& s = corpus.samples[i];
    by_pair[{s.source_tag, s.target_tag}].push_back(i);
  }
  return by_pair;
}

Corpus keep_indices(const Corpus& corpus, const std::set<std::size_t>& keep) {
  std::vector<Sample> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(corpus.samples[i]);
  return Corpus::from_samples(std::move(out));
}

std::set<std::size_t> reduced_indices(const Corpus& corpus,
                                      const std::vector<TagPair>& pairs,
                                      double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("reduce: fraction must lie in (0, 1]");
  auto by_pair = indices_by_pair(corpus);
  std::set<TagPair> reduce_set(pairs.begin(), pairs.end());
  std::set<std::size_t> keep;
  for (auto& [pair, idx] : by_pair) {
    if (!reduce_set.count(pair)) {
      keep.insert(idx.begin(), idx.end());
      continue;
    }
    Rng rng(derive_seed(seed, pair_label(pair)));
    rng.shuffle(idx);
    const auto kept = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < kept && k < idx.size(); ++k)
      keep.insert(idx[k]);
  }
  return keep;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

}  // namespace

double exact_match(const std::vector<std::string>& predictions,
                   const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size())
    throw std::invalid_argument("exact_match: length mismatch");
  if (predictions.empty()) return 1.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == golds[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

FoldSet make_celex_folds(const Corpus& corpus, std::uint64_t seed) {
  if (corpus.empty())
    throw std::invalid_argument("folds: empty corpus");
  constexpr std::size_t kFolds = 5;
  FoldSet fs;
  fs.folds.resize(kFolds);
  std::vector<std::vector<std::vector<std::size_t>>> blocks_per_pair;
  for (auto& [pair, idx] : indices_by_pair(corpus)) {
    if (idx.size() < 3)
      throw std::invalid_argument("folds: tag pair " + pair.first + " -> " +
                                  pair.second + " has only " +
                                  std::to_string(idx.size()) +
                                  " samples; need at least 3");
    if (idx.size() < 2500) fs.scaled = true;
    std::vector<std::size_t> shuffled = idx;
    Rng rng(derive_seed(seed, pair_label(pair)));
    rng.shuffle(shuffled);
    std::vector<std::vector<std::size_t>> blocks(kFolds);
    const std::size_t base = shuffled.size() / kFolds;
    const std::size_t extra = shuffled.size() % kFolds;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < kFolds; ++b) {
      const std::size_t len = base + (b < extra ? 1 : 0);
      blocks[b].assign(shuffled.begin() + pos, shuffled.begin() + pos + len);
      pos += len;
    }
    blocks_per_pair.push_back(std::move(blocks));
  }
  for (std::size_t f = 0; f < kFolds; ++f) {
    std::vector<Sample> train, dev, test;
    for (const auto& blocks : blocks_per_pair) {
      const auto append = [&corpus](std::vector<Sample>& dst,
                                    const std::vector<std::size_t>& block) {
        for (std::size_t i : block) dst.push_back(corpus.samples[i]);
      };
      append(train, blocks[f]);
      append(dev, blocks[(f + 1) % kFolds]);
      append(dev, blocks[(f + 2) % kFolds]);
      append(test, blocks[(f + 3) % kFolds]);
      append(test, blocks[(f + 4) % kFolds]);
    }
    fs.folds[f].train = Corpus::from_samples(std::move(train));
    fs.folds[f].dev = Corpus::from_samples(std::move(dev));
    fs.folds[f].test = Corpus::from_samples(std::move(test));
  }
  return fs;
}

Corpus reduce_tagpair(const Corpus& corpus, const TagPair& pair,
                      double fraction, std::uint64_t seed) {
  if (!corpus.tag_pairs.count(pair))
    throw std::invalid_argument("reduce: unknown tag pair " + pair.first +
                                " -> " + pair.second);
  return keep_indices(corpus,
                      reduced_indices(corpus, {pair}, fraction, seed));
}

Corpus reduce_all(const Corpus& corpus, double fraction, std::uint64_t seed) {
  std::vector<TagPair> pairs(corpus.tag_pairs.begin(),
                             corpus.tag_pairs.end());
  return keep_indices(corpus,
                      reduced_indices(corpus, pairs, fraction, seed));
}

EvalReport evaluate_predictions(
    const std::vector<std::vector<std::string>>& member_predictions,
    const Corpus& test, const poet::PoetStore* store, Rng& rng) {
  if (member_predictions.empty())
    throw std::invalid_argument("evaluate: no members");
  for (const auto& preds : member_predictions) {
    if (preds.size() != test.size())
      throw std::invalid_argument(
          "evaluate: member prediction count does not match the test set");
  }
  std::vector<std::string> golds;
  golds.reserve(test.size());
  for (std::size_t i = 0; i < test.samples.size(); ++i) {
    if (!test.samples[i].target_form)
      throw std::invalid_argument("evaluate: test sample " +
                                  std::to_string(i + 1) + " has no gold form");
    golds.push_back(*test.samples[i].target_form);
  }

  EvalReport report;
  report.total = test.size();
  report.ensemble = member_predictions.size() > 1;
  for (const auto& preds : member_predictions)
    report.member_accuracies.push_back(exact_match(preds, golds));
  double mean = 0.0;
  for (double a : report.member_accuracies) mean += a;
  mean /= static_cast<double>(report.member_accuracies.size());
  double var = 0.0;
  for (double a : report.member_accuracies) var += (a - mean) * (a - mean);
  var /= static_cast<double>(report.member_accuracies.size());
  report.mean_accuracy = mean;
  report.std_accuracy = std::sqrt(var);

  report.predictions.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::vector<std::string> votes;
    votes.reserve(member_predictions.size());
    for (const auto& preds : member_predictions) votes.push_back(preds[i]);
    report.predictions.push_back(model::majority_vote(votes, rng));
  }
  report.accuracy = exact_match(report.predictions, golds);

  if (store) {
    report.poet_applied = true;
    report.corrected.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Sample& s = test.samples[i];
      report.corrected.push_back(poet::correct(*store, s.source_form,
                                               s.source_tag, s.target_tag,
                                               report.predictions[i], rng));
    }
    report.corrected_accuracy = exact_match(report.corrected, golds);
  }

  for (auto& [pair, idx] : indices_by_pair(test)) {
    PairReport pr;
    pr.pair = pair;
    pr.count = idx.size();
    std::size_t correct = 0, corrected_ok = 0;
    for (std::size_t i : idx) {
      if (report.predictions[i] == golds[i]) ++correct;
      if (report.poet_applied && report.corrected[i] == golds[i])
        ++corrected_ok;
    }
    pr.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
    if (report.poet_applied) {
      pr.corrected_accuracy =
          static_cast<double>(corrected_ok) / static_cast<double>(idx.size());
    }
    report.pairs.push_back(std::move(pr));
  }
  return report;
}

EvalReport evaluate(const std::vector<const model::Model*>& models,
                    const Corpus& test, const poet::PoetStore* store, Rng& rng,
                    std::size_t beam_width) {
  if (models.empty())
    throw std::invalid_argument("evaluate: no models");
  for (const model::Model* m : models) {
    if (!(m->vocab == models[0]->vocab))
      throw std::invalid_argument(
          "evaluate: members use different vocabularies");
  }
  std::vector<std::vector<std::string>> member_predictions;
  member_predictions.reserve(models.size());
  for (const model::Model* m : models) {
    std::vector<std::string> preds;
    preds.reserve(test.size());
    for (const Sample& s : test.samples) {
      preds.push_back(model::predict(
          *m, s, beam_width ? beam_width : m->config.beam_width));
    }
    member_predictions.push_back(std::move(preds));
  }
  return evaluate_predictions(member_predictions, test, store, rng);
}

std::string report_table(const EvalReport& report) {
  std::ostringstream os;
  os << "samples: " << report.total << "\n";
  os << "mode: " << (report.ensemble ? "ensemble" : "single") << " ("
     << report.member_accuracies.size() << " member"
     << (report.member_accuracies.size() == 1 ? "" : "s") << ")\n";
  os << "member accuracy: mean " << percent(report.mean_accuracy) << " (std "
     << percent(report.std_accuracy) << ")";
  os << " [";
  for (std::size_t i = 0; i < report.member_accuracies.size(); ++i) {
    if (i) os << " ";
    os << percent(report.member_accuracies[i]);
  }
  os << "]\n";
  os << "accuracy: " << percent(report.accuracy) << "\n";
  if (report.poet_applied) {
    os << "corrected accuracy: " << percent(report.corrected_accuracy)
       << " (delta " << percent(report.corrected_accuracy - report.accuracy)
       << ")\n";
  }
  os << "per tag pair:\n";
  for (const PairReport& pr : report.pairs) {
    os << "  " << pr.pair.first << " -> " << pr.pair.second
       << "  n=" << pr.count << "  accuracy=" << percent(pr.accuracy);
    if (report.poet_applied) {
      os << "  corrected=" << percent(pr.corrected_accuracy) << " (delta "
         << percent(pr.corrected_accuracy - pr.accuracy) << ")";
    }
    os << "\n";
  }
  return os.str();
}

void write_predictions(const Corpus& test,
                       const std::vector<std::string>& predictions,
                       const std::string& path) {
  if (predictions.size() != test.size())
    throw std::invalid_argument("write_predictions: length mismatch");
  std::vector<Sample> rows = test.samples;
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i].target_form = predictions[i];
  save_tsv(Corpus::from_samples(std::move(rows)), path);
}

void write_report(const EvalReport& report, const Corpus& test,
                  const std::string& path) {
  write_predictions(test, report.predictions, path + ".predictions.tsv");
  if (report.poet_applied)
    write_predictions(test, report.corrected, path + ".corrected.tsv");

  ordered_json j;
  j["total"] = report.total;
  j["mode"] = report.ensemble ? "ensemble" : "single";
  j["member_accuracies"] = report.member_accuracies;
  j["mean_accuracy"] = report.mean_accuracy;
  j["std_accuracy"] = report.std_accuracy;
  j["accuracy"] = report.accuracy;
  j["poet_applied"] = report.poet_applied;
  if (report.poet_applied) {
    j["corrected_accuracy"] = report.corrected_accuracy;
    j["corrected_delta"] = report.corrected_accuracy - report.accuracy;
  }
  ordered_json pairs = ordered_json::array();
  for (const PairReport& pr : report.pairs) {
    ordered_json pj;
    pj["source_tag"] = pr.pair.first;
    pj["target_tag"] = pr.pair.second;
    pj["count"] = pr.count;
    pj["accuracy"] = pr.accuracy;
    if (report.poet_applied) {
      pj["corrected_accuracy"] = pr.corrected_accuracy;
      pj["corrected_delta"] = pr.corrected_accuracy - pr.accuracy;
    }
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs);
  j["predictions_file"] = path + ".predictions.tsv";
  if (report.poet_applied) j["corrected_file"] = path + ".corrected.tsv";

  std::ofstream os(path);
  if (!os) throw std::runtime_error("report: cannot open " + path);
  os << j.dump(2) << "\n";
}

}  // namespace med::harness
