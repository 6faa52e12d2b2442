#include "med/poet.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace med::poet {

namespace {

constexpr const char* kStoreHeader = "poet-store\t1";

}  // namespace

void PoetStore::add(const std::string& source_tag,
                    const std::string& target_tag,
                    const edit::EditTreeRef& tree) {
  Entry& e = pairs_[{source_tag, target_tag}][edit::canonical_key(*tree)];
  if (!e.tree) e.tree = tree;
  ++e.frequency;
}

const PoetStore::TreeMap* PoetStore::trees_for(
    const std::string& source_tag, const std::string& target_tag) const {
  auto it = pairs_.find({source_tag, target_tag});
  return it == pairs_.end() ? nullptr : &it->second;
}

std::uint64_t PoetStore::total_observations() const {
  std::uint64_t n = 0;
  for (const auto& [pair, trees] : pairs_) {
    for (const auto& [key, entry] : trees) n += entry.frequency;
  }
  return n;
}

bool PoetStore::operator==(const PoetStore& other) const {
  if (pairs_.size() != other.pairs_.size()) return false;
  auto a = pairs_.begin();
  auto b = other.pairs_.begin();
  for (; a != pairs_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.size() != b->second.size())
      return false;
    auto ta = a->second.begin();
    auto tb = b->second.begin();
    for (; ta != a->second.end(); ++ta, ++tb) {
      if (ta->first != tb->first || ta->second.frequency != tb->second.frequency)
        return false;
    }
  }
  return true;
}

PoetStore build_store(const Corpus& corpus) {
  PoetStore store;
  for (const Sample& s : corpus.samples) {
    if (!s.target_form)
      throw std::invalid_argument("sample \"" + s.source_form +
                                  "\" has no target form");
    store.add(s.source_tag, s.target_tag,
              edit::build_edit_tree(s.source_form, *s.target_form));
  }
  return store;
}

std::vector<Candidate> candidates(const PoetStore& store,
                                  const std::string& source_form,
                                  const std::string& source_tag,
                                  const std::string& target_tag,
                                  const std::string& prediction) {
  std::vector<Candidate> out;
  const PoetStore::TreeMap* trees = store.trees_for(source_tag, target_tag);
  if (!trees) return out;
  // Applying every observed tree covers all supported forms: a form whose
  // recomputed tree is in the store is produced by that very tree.
  std::map<std::string, Candidate> by_form;
  for (const auto& [key, entry] : *trees) {
    auto produced = edit::apply_edit_tree(*entry.tree, source_form);
    if (!produced) continue;
    if (edit::levenshtein(prediction, *produced) != 1) continue;
    auto it = by_form.find(*produced);
    if (it == by_form.end()) {
      // Applying a tree does not guarantee the recomputed tree equals it;
      // membership is defined on the recomputed tree.
      const std::string recomputed_key =
          edit::canonical_key(*edit::build_edit_tree(source_form, *produced));
      if (!trees->count(recomputed_key)) continue;
      it = by_form.emplace(*produced, Candidate{*produced, key, entry.frequency})
               .first;
    } else if (entry.frequency > it->second.frequency) {
      it->second.tree_key = key;
      it->second.frequency = entry.frequency;
    }
  }
  out.reserve(by_form.size());
  for (auto& [form, cand] : by_form) out.push_back(std::move(cand));
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    if (a.tree_key != b.tree_key) return a.tree_key < b.tree_key;
    return a.form < b.form;
  });
  return out;
}

std::string correct(const PoetStore& store, const std::string& source_form,
                    const std::string& source_tag,
                    const std::string& target_tag,
                    const std::string& prediction, Rng& rng) {
  const PoetStore::TreeMap* trees = store.trees_for(source_tag, target_tag);
  if (!trees) return prediction;
  const std::string key = edit::canonical_key(
      *edit::build_edit_tree(source_form, prediction));
  if (trees->count(key)) return prediction;
  const std::vector<Candidate> cands =
      candidates(store, source_form, source_tag, target_tag, prediction);
  if (cands.empty()) return prediction;
  std::size_t tied = 1;
  while (tied < cands.size() && cands[tied].frequency == cands[0].frequency)
    ++tied;
  return cands[tied == 1 ? 0 : rng.below(tied)].form;
}

void save_store(const PoetStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kStoreHeader << '\n';
  for (const auto& [pair, trees] : store.pairs()) {
    for (const auto& [key, entry] : trees) {
      out << pair.first << '\t' << pair.second << '\t' << key << '\t'
          << entry.frequency << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

PoetStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      (line != kStoreHeader && line != std::string(kStoreHeader) + "\r"))
    throw std::runtime_error(path + ": not a poet store file");
  PoetStore store;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t p1 = line.find('\t');
    std::size_t p2 = p1 == std::string::npos ? p1 : line.find('\t', p1 + 1);
    std::size_t p3 = p2 == std::string::npos ? p2 : line.find('\t', p2 + 1);
    if (p3 == std::string::npos)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 4 tab-separated fields");
    const std::string source_tag = line.substr(0, p1);
    const std::string target_tag = line.substr(p1 + 1, p2 - p1 - 1);
    const std::string key = line.substr(p2 + 1, p3 - p2 - 1);
    const std::uint64_t freq = std::stoull(line.substr(p3 + 1));
    if (freq == 0)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": zero frequency");
    edit::EditTreeRef tree = edit::parse_key(key);
    for (std::uint64_t i = 0; i < freq; ++i)
      store.add(source_tag, target_tag, tree);
  }
  return store;
}

}  // namespace med::poet
