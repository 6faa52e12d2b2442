#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "med/corpus.hpp"
#include "med/edittree.hpp"
#include "med/rng.hpp"

namespace med::poet {

// Per-(source tag, target tag) multiset of edit trees observed in training.
class PoetStore {
 public:
  struct Entry {
    edit::EditTreeRef tree;
    std::uint64_t frequency = 0;
  };
  using TreeMap = std::map<std::string, Entry>;  // canonical key -> entry

  void add(const std::string& source_tag, const std::string& target_tag,
           const edit::EditTreeRef& tree);

  // Null when the pair was never seen in training.
  const TreeMap* trees_for(const std::string& source_tag,
                           const std::string& target_tag) const;

  const std::map<TagPair, TreeMap>& pairs() const { return pairs_; }
  std::size_t pair_count() const { return pairs_.size(); }
  std::uint64_t total_observations() const;
  bool empty() const { return pairs_.empty(); }

  bool operator==(const PoetStore& other) const;

 private:
  std::map<TagPair, TreeMap> pairs_;
};

// One edit tree per training sample, keyed by its tag pair.
// Every sample must carry a target form.
PoetStore build_store(const Corpus& corpus);

struct Candidate {
  std::string form;
  std::string tree_key;  // highest-frequency observed tree producing `form`
  std::uint64_t frequency = 0;
};

// All forms obtainable by applying an observed tree of the pair to the
// source form that (a) lie at edit distance exactly 1 from the prediction
// and (b) have their own recomputed edit tree in the store. Sorted by
// frequency descending, then tree key.
std::vector<Candidate> candidates(const PoetStore& store,
                                  const std::string& source_form,
                                  const std::string& source_tag,
                                  const std::string& target_tag,
                                  const std::string& prediction);

// Output correction: keeps a prediction whose edit tree was observed for the
// tag pair, otherwise substitutes the best supported neighbour at edit
// distance 1 (most frequent tree wins, remaining ties drawn from rng).
// Falls back to the unchanged prediction.
std::string correct(const PoetStore& store, const std::string& source_form,
                    const std::string& source_tag,
                    const std::string& target_tag,
                    const std::string& prediction, Rng& rng);

// Line-oriented UTF-8 file: a version header, then
// source_tag \t target_tag \t canonical_key \t frequency, sorted.
void save_store(const PoetStore& store, const std::string& path);
PoetStore load_store(const std::string& path);

}  // namespace med::poet
