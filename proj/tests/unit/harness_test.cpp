#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "med/corpus.hpp"
#include "med/harness.hpp"
#include "med/poet.hpp"
#include "med/rng.hpp"

using namespace med;
using namespace med::harness;

namespace {

Corpus suffix_corpus(std::size_t n, const std::string& s = "base",
                     const std::string& t = "inf") {
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    std::string stem = "w";
    std::size_t v = i;
    do {
      stem += static_cast<char>('a' + v % 26);
      v /= 26;
    } while (v > 0);
    samples.push_back({stem, s, t, stem + "en"});
  }
  return Corpus::from_samples(std::move(samples));
}

std::set<std::string> forms(const Corpus& c) {
  std::set<std::string> out;
  for (const auto& s : c.samples) out.insert(s.source_form);
  return out;
}

}  // namespace

TEST_CASE("exact_match arithmetic") {
  CHECK(exact_match({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(exact_match({"a", "b"}, {"x", "y"}) == 0.0);
  CHECK(exact_match({"a", "b", "c", "d"}, {"a", "b", "c", "x"}) == 0.75);
  CHECK(exact_match({}, {}) == 1.0);
  CHECK_THROWS(exact_match({"a"}, {}));
}

TEST_CASE("celex folds on 2500 samples give 500/1000/1000") {
  Corpus c = suffix_corpus(2500);
  FoldSet fs = make_celex_folds(c, 42);
  CHECK_FALSE(fs.scaled);
  REQUIRE(fs.folds.size() == 5);
  for (const Fold& f : fs.folds) {
    CHECK(f.train.size() == 500);
    CHECK(f.dev.size() == 1000);
    CHECK(f.test.size() == 1000);
    // splits are disjoint within a fold
    std::set<std::string> tr = forms(f.train);
    std::set<std::string> dv = forms(f.dev);
    std::set<std::string> te = forms(f.test);
    for (const auto& x : tr) {
      CHECK(dv.count(x) == 0);
      CHECK(te.count(x) == 0);
    }
    for (const auto& x : dv) CHECK(te.count(x) == 0);
  }
}

TEST_CASE("celex folds scale small pairs and rotate blocks") {
  Corpus c = suffix_corpus(25);
  FoldSet fs = make_celex_folds(c, 7);
  CHECK(fs.scaled);
  REQUIRE(fs.folds.size() == 5);
  for (const Fold& f : fs.folds) {
    CHECK(f.train.size() == 5);
    CHECK(f.dev.size() == 10);
    CHECK(f.test.size() == 10);
  }
  // each sample trains in exactly one fold
  for (const auto& form : forms(c)) {
    int in_train = 0;
    for (const Fold& f : fs.folds) in_train += forms(f.train).count(form);
    CHECK(in_train == 1);
  }
  // determinism
  FoldSet again = make_celex_folds(c, 7);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(forms(again.folds[i].train) == forms(fs.folds[i].train));
  }
  FoldSet shifted = make_celex_folds(c, 8);
  bool differs = false;
  for (std::size_t i = 0; i < 5; ++i) {
    differs |= (forms(shifted.folds[i].train) != forms(fs.folds[i].train));
  }
  CHECK(differs);
}

TEST_CASE("celex folds reject pairs below the minimum") {
  Corpus c = suffix_corpus(2);
  CHECK_THROWS(make_celex_folds(c, 0));
}

TEST_CASE("reduce keeps the ceiling per pair and leaves others alone") {
  Corpus big = suffix_corpus(512, "base", "t1");
  Corpus small = suffix_corpus(100, "base", "t2");
  std::vector<Sample> all = big.samples;
  all.insert(all.end(), small.samples.begin(), small.samples.end());
  Corpus c = Corpus::from_samples(all);

  Corpus r = reduce_tagpair(c, {"base", "t1"}, 0.0625, 3);
  std::size_t t1 = 0, t2 = 0;
  for (const auto& s : r.samples) (s.target_tag == "t1" ? t1 : t2)++;
  CHECK(t1 == 32);
  CHECK(t2 == 100);

  CHECK(reduce_tagpair(c, {"base", "t1"}, 1.0, 3).size() == c.size());
  CHECK_THROWS(reduce_tagpair(c, {"no", "pair"}, 0.5, 3));
  CHECK_THROWS(reduce_tagpair(c, {"base", "t1"}, 0.0, 3));
  CHECK_THROWS(reduce_tagpair(c, {"base", "t1"}, 1.5, 3));
}

TEST_CASE("reductions nest along the halving chain") {
  Corpus c = suffix_corpus(64);
  std::set<std::string> prev = forms(c);
  for (double f : {0.5, 0.25, 0.125, 0.0625}) {
    Corpus r = reduce_all(c, f, 11);
    auto cur = forms(r);
    CHECK(r.size() == static_cast<std::size_t>(std::ceil(64 * f)));
    CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
    prev = cur;
  }
}

TEST_CASE("reduce preserves corpus order") {
  Corpus c = suffix_corpus(16);
  Corpus r = reduce_all(c, 0.5, 2);
  // kept samples appear in their original relative order
  std::vector<std::string> original;
  for (const auto& s : c.samples) original.push_back(s.source_form);
  std::vector<std::string> kept;
  for (const auto& s : r.samples) kept.push_back(s.source_form);
  std::vector<std::string> filtered;
  for (const auto& f : original) {
    if (std::find(kept.begin(), kept.end(), f) != kept.end()) {
      filtered.push_back(f);
    }
  }
  CHECK(kept == filtered);
}

TEST_CASE("evaluate_predictions scores members, mean, std, vote") {
  Corpus test = Corpus::from_samples({{"a", "s", "t", "x"},
                                      {"b", "s", "t", "y"},
                                      {"c", "s", "t", "z"},
                                      {"d", "s", "t", "w"}});
  // member 1 gets all, member 2 gets half, member 3 gets half
  std::vector<std::vector<std::string>> members = {
      {"x", "y", "z", "w"},
      {"x", "y", "q", "q"},
      {"x", "q", "z", "q"},
  };
  Rng rng(0);
  EvalReport r = evaluate_predictions(members, test, nullptr, rng);
  CHECK(r.total == 4);
  CHECK(r.ensemble);
  REQUIRE(r.member_accuracies.size() == 3);
  CHECK(r.member_accuracies[0] == 1.0);
  CHECK(r.member_accuracies[1] == 0.5);
  CHECK(r.member_accuracies[2] == 0.5);
  CHECK(r.mean_accuracy == doctest::Approx(2.0 / 3.0));
  // population std of {1, .5, .5}
  double mean = 2.0 / 3.0;
  double var = ((1 - mean) * (1 - mean) + 2 * (0.5 - mean) * (0.5 - mean)) / 3;
  CHECK(r.std_accuracy == doctest::Approx(std::sqrt(var)));
  // votes: x (3), y (2-1 over q), z (2-1), q (2-1 over w)
  REQUIRE(r.predictions.size() == 4);
  CHECK(r.predictions[0] == "x");
  CHECK(r.predictions[1] == "y");
  CHECK(r.predictions[2] == "z");
  CHECK(r.predictions[3] == "q");
  CHECK(r.accuracy == doctest::Approx(0.75));
  CHECK_FALSE(r.poet_applied);
}

TEST_CASE("evaluate_predictions validates input") {
  Corpus test = Corpus::from_samples({{"a", "s", "t", "x"}});
  Rng rng(0);
  CHECK_THROWS(evaluate_predictions({}, test, nullptr, rng));
  CHECK_THROWS(evaluate_predictions({{"x", "extra"}}, test, nullptr, rng));
  Corpus nogold = Corpus::from_samples({{"a", "s", "t", std::nullopt}});
  CHECK_THROWS(evaluate_predictions({{"x"}}, nogold, nullptr, rng));
}

TEST_CASE("poet micro-fixture corrects one-edit errors to exactly 1.0") {
  Corpus test = Corpus::from_samples({{"holt", "rP", "pA", "geholt"},
                                      {"sagt", "rP", "pA", "gesagt"},
                                      {"kauft", "rP", "pA", "gekauft"}});
  poet::PoetStore store = poet::build_store(test);
  // predictions one edit off the gold, with the gold's tree in the store
  std::vector<std::vector<std::string>> members = {
      {"gholt", "gesagtx", "gekuft"}};
  Rng rng(4);
  EvalReport r = evaluate_predictions(members, test, &store, rng);
  CHECK(r.accuracy == 0.0);
  CHECK(r.poet_applied);
  CHECK(r.corrected_accuracy == 1.0);
  REQUIRE(r.corrected.size() == 3);
  CHECK(r.corrected[0] == "geholt");
  CHECK(r.corrected[1] == "gesagt");
  CHECK(r.corrected[2] == "gekauft");
}

TEST_CASE("empty store passes predictions through") {
  Corpus test = Corpus::from_samples({{"holt", "rP", "pA", "geholt"}});
  poet::PoetStore empty;
  std::vector<std::vector<std::string>> members = {{"gholt"}};
  Rng rng(4);
  EvalReport r = evaluate_predictions(members, test, &empty, rng);
  CHECK(r.poet_applied);
  CHECK(r.corrected_accuracy == r.accuracy);
  CHECK(r.corrected[0] == "gholt");
}

TEST_CASE("per-pair breakdown counts each pair separately") {
  Corpus test = Corpus::from_samples({{"a", "s", "t1", "x"},
                                      {"b", "s", "t1", "y"},
                                      {"c", "s", "t2", "z"}});
  std::vector<std::vector<std::string>> members = {{"x", "wrong", "z"}};
  Rng rng(0);
  EvalReport r = evaluate_predictions(members, test, nullptr, rng);
  REQUIRE(r.pairs.size() == 2);
  const PairReport* t1 = nullptr;
  const PairReport* t2 = nullptr;
  for (const auto& pr : r.pairs) {
    if (pr.pair.second == "t1") t1 = &pr;
    if (pr.pair.second == "t2") t2 = &pr;
  }
  REQUIRE(t1);
  REQUIRE(t2);
  CHECK(t1->count == 2);
  CHECK(t1->accuracy == doctest::Approx(0.5));
  CHECK(t2->count == 1);
  CHECK(t2->accuracy == 1.0);
}

TEST_CASE("write_report emits json and sidecars that recompute") {
  Corpus test = Corpus::from_samples({{"holt", "rP", "pA", "geholt"},
                                      {"sagt", "rP", "pA", "gesagt"}});
  poet::PoetStore store = poet::build_store(test);
  std::vector<std::vector<std::string>> members = {{"geholt", "gsagt"}};
  Rng rng(1);
  EvalReport r = evaluate_predictions(members, test, &store, rng);
  auto dir = std::filesystem::temp_directory_path() / "med_report_test";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "report.json").string();
  write_report(r, test, path);

  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["total"] == 2);
  CHECK(j["accuracy"] == doctest::Approx(0.5));
  CHECK(j["corrected_accuracy"] == doctest::Approx(1.0));
  CHECK(j["poet_applied"] == true);

  // aggregate accuracy recomputes from the prediction sidecar
  Corpus preds = load_tsv(path + ".predictions.tsv");
  REQUIRE(preds.size() == test.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds.samples[i].target_form == test.samples[i].target_form) {
      ++correct;
    }
  }
  CHECK(static_cast<double>(correct) / preds.size() ==
        doctest::Approx(r.accuracy));
  Corpus corr = load_tsv(path + ".corrected.tsv");
  REQUIRE(corr.size() == 2);
  CHECK(*corr.samples[1].target_form == "gesagt");

  std::string table = report_table(r);
  CHECK(table.find("50.0") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("write_predictions fills the target column") {
  Corpus data = Corpus::from_samples({{"holt", "rP", "pA", std::nullopt}});
  auto p = std::filesystem::temp_directory_path() / "med_preds.tsv";
  write_predictions(data, {"geholt"}, p.string());
  Corpus back = load_tsv(p.string());
  REQUIRE(back.size() == 1);
  CHECK(back.samples[0].source_form == "holt");
  CHECK(*back.samples[0].target_form == "geholt");
  std::filesystem::remove(p);
}
