#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "med/corpus.hpp"
#include "med/model.hpp"
#include "med/poet.hpp"
#include "med/rng.hpp"

namespace med::harness {

// Fraction of positions where prediction equals gold, codepoint-exact.
// Empty lists score 1.0.
double exact_match(const std::vector<std::string>& predictions,
                   const std::vector<std::string>& golds);

struct Fold {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Five rotated folds per tag pair: a seeded shuffle is cut into five blocks;
// fold i trains on block i, develops on the next two, tests on the last two
// (cyclically). 2500 samples per pair give the full 500/1000/1000 protocol;
// smaller pairs scale proportionally and set `scaled`.
struct FoldSet {
  std::vector<Fold> folds;
  bool scaled = false;
};

FoldSet make_celex_folds(const Corpus& corpus, std::uint64_t seed);

// Keeps ceil(fraction * n) seeded-random samples of the pair, all other
// pairs untouched. Fractions nest: the kept set shrinks monotonically as the
// fraction drops under one seed.
Corpus reduce_tagpair(const Corpus& corpus, const TagPair& pair,
                      double fraction, std::uint64_t seed);

// reduce_tagpair over every pair with one seed.
Corpus reduce_all(const Corpus& corpus, double fraction, std::uint64_t seed);

struct PairReport {
  TagPair pair;
  std::size_t count = 0;
  double accuracy = 0.0;
  double corrected_accuracy = 0.0;  // meaningful when poet ran
};

struct EvalReport {
  std::size_t total = 0;
  bool ensemble = false;  // more than one member
  std::vector<double> member_accuracies;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation over members
  double accuracy = 0.0;      // voted predictions vs golds
  bool poet_applied = false;
  double corrected_accuracy = 0.0;
  std::vector<PairReport> pairs;
  std::vector<std::string> predictions;  // voted, one per test sample
  std::vector<std::string> corrected;    // empty unless poet ran
};

// Scores per-member prediction lists (members x samples) against the test
// corpus; optionally applies store corrections to the voted outputs.
EvalReport evaluate_predictions(
    const std::vector<std::vector<std::string>>& member_predictions,
    const Corpus& test, const poet::PoetStore* store, Rng& rng);

// Runs every member over the test corpus, then scores. beam_width > 0
// overrides the members' configured widths.
EvalReport evaluate(const std::vector<const model::Model*>& models,
                    const Corpus& test, const poet::PoetStore* store, Rng& rng,
                    std::size_t beam_width = 0);

// Human-readable summary, accuracies in percent to one decimal.
std::string report_table(const EvalReport& report);

// JSON report at `path` plus per-sample TSV sidecars: path + ".predictions.tsv"
// and, when poet ran, path + ".corrected.tsv".
void write_report(const EvalReport& report, const Corpus& test,
                  const std::string& path);

// TSV rows source_tag \t source_form \t target_tag \t prediction.
void write_predictions(const Corpus& test,
                       const std::vector<std::string>& predictions,
                       const std::string& path);

}  // namespace med::harness
