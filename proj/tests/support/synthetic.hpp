#pragma once

#include <string>
#include <utility>
#include <vector>

#include "med/corpus.hpp"

namespace med::testsupport {

// Eight reinflection patterns over twelve CVC stems: two prefixations, two
// suffixations, two stem-vowel substitutions, two identities. 96 samples,
// one source tag, eight target tags.
inline Corpus make_pattern_corpus() {
  const std::vector<std::string> stems = {"bad", "dag", "fak", "gal",
                                          "kam", "lan", "mab", "nar",
                                          "rab", "sat", "taf", "fas"};
  auto swap_a = [](const std::string& s, const std::string& r) {
    std::string out;
    for (char c : s) {
      if (c == 'a') {
        out += r;
      } else {
        out += c;
      }
    }
    return out;
  };
  std::vector<Sample> samples;
  for (const auto& stem : stems) {
    samples.push_back({stem, "base", "pref-ge", "ge" + stem});
    samples.push_back({stem, "base", "pref-be", "be" + stem});
    samples.push_back({stem, "base", "suf-en", stem + "en"});
    samples.push_back({stem, "base", "suf-te", stem + "te"});
    samples.push_back({stem, "base", "vow-ae", swap_a(stem, "\xC3\xA4")});
    samples.push_back({stem, "base", "vow-o", swap_a(stem, "o")});
    samples.push_back({stem, "base", "same-1", stem});
    samples.push_back({stem, "base", "same-2", stem});
  }
  return Corpus::from_samples(std::move(samples));
}

// Stems for the transfer experiment: a strided slice through the CVC product
// so train and held-out sets share the same character distribution.
inline std::vector<std::string> transfer_stems() {
  const std::string cons = "bdfgklmnprst";
  const std::string vows = "aiou";
  std::vector<std::string> all;
  for (char c1 : cons) {
    for (char v : vows) {
      for (char c2 : cons) {
        if (c1 != c2) all.push_back(std::string{c1, v, c2});
      }
    }
  }
  std::vector<std::string> picked;
  for (std::size_t i = 0; i < all.size() && picked.size() < 56; i += 9) {
    picked.push_back(all[i]);
  }
  return picked;
}

inline std::vector<std::string> transfer_test_stems() {
  auto picked = transfer_stems();
  std::vector<std::string> test;
  for (std::size_t i = 5; i < picked.size() && test.size() < 8; i += 7) {
    test.push_back(picked[i]);
  }
  return test;
}

inline std::vector<std::string> transfer_train_stems() {
  auto picked = transfer_stems();
  auto test = transfer_test_stems();
  std::vector<std::string> train;
  for (const auto& s : picked) {
    bool held_out = false;
    for (const auto& t : test) held_out |= (s == t);
    if (!held_out && train.size() < 48) train.push_back(s);
  }
  return train;
}

// Four tag pairs sharing the append-"en" rule. Pair t1 sees only the train
// stems; t2..t4 see every stem including the held-out ones, so a model
// trained across pairs can transfer the rule to them under t1.
inline Corpus make_transfer_corpus() {
  std::vector<Sample> samples;
  for (const auto& s : transfer_train_stems()) {
    samples.push_back({s, "base", "t1", s + "en"});
  }
  for (const std::string& tag : {"t2", "t3", "t4"}) {
    for (const auto& s : transfer_stems()) {
      samples.push_back({s, "base", tag, s + "en"});
    }
  }
  return Corpus::from_samples(std::move(samples));
}

// Held-out t1 samples scoring the transfer.
inline Corpus make_transfer_test() {
  std::vector<Sample> samples;
  for (const auto& s : transfer_test_stems()) {
    samples.push_back({s, "base", "t1", s + "en"});
  }
  return Corpus::from_samples(std::move(samples));
}

// t1 rows only: the per-pair control training set.
inline Corpus make_transfer_control() {
  std::vector<Sample> samples;
  for (const auto& s : transfer_train_stems()) {
    samples.push_back({s, "base", "t1", s + "en"});
  }
  return Corpus::from_samples(std::move(samples));
}

// The same corpus with every target truncated by its final character: a
// systematic one-edit error for correction experiments.
inline Corpus drop_last_char(const Corpus& corpus) {
  std::vector<Sample> samples;
  for (const auto& s : corpus.samples) {
    Sample copy = s;
    if (copy.target_form && !copy.target_form->empty()) {
      copy.target_form->pop_back();  // stems are ASCII here
    }
    samples.push_back(std::move(copy));
  }
  return Corpus::from_samples(std::move(samples));
}

}  // namespace med::testsupport
