#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace med {

// One reinflection instance. target_form is absent in prediction files.
struct Sample {
  std::string source_form;
  std::string source_tag;
  std::string target_tag;
  std::optional<std::string> target_form;
};

using TagPair = std::pair<std::string, std::string>;

struct Corpus {
  std::vector<Sample> samples;
  std::set<TagPair> tag_pairs;

  static Corpus from_samples(std::vector<Sample> samples);

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

enum class TagSide { kInput, kOutput };

// Splits a raw tag ("pos=ADJ,case=GEN,num=PL") into side-prefixed subtag
// tokens ("IN=pos=ADJ", ...). Order preserved; unkeyed subtags pass through
// behind the prefix. Throws on an empty tag or empty subtag.
std::vector<std::string> parse_tag(std::string_view raw, TagSide side);

// Quadruple TSV: source_tag \t source_form \t target_tag \t target_form,
// UTF-8 with LF line endings. The fourth field may be missing or empty in
// prediction files. Empty lines are skipped.
Corpus load_tsv(const std::string& path);
void save_tsv(const Corpus& corpus, const std::string& path);

// Token/id bijection for the encoder input side (specials + subtags + the
// language alphabet) and the decoder output side (specials + alphabet).
// Ids are stable: specials first, then all remaining tokens sorted.
class Vocabulary {
 public:
  static constexpr const char* kStart = "<w>";
  static constexpr const char* kEnd = "</w>";
  static constexpr const char* kUnk = "<unk>";
  static constexpr int kStartId = 0;
  static constexpr int kEndId = 1;
  static constexpr int kUnkId = 2;

  Vocabulary() = default;
  Vocabulary(std::vector<std::string> input_tokens,
             std::vector<std::string> output_tokens);

  int input_id(const std::string& token) const;
  int output_id(const std::string& token) const;
  const std::string& input_token(int id) const;
  const std::string& output_token(int id) const;
  std::size_t input_size() const { return input_tokens_.size(); }
  std::size_t output_size() const { return output_tokens_.size(); }
  const std::vector<std::string>& input_tokens() const { return input_tokens_; }
  const std::vector<std::string>& output_tokens() const {
    return output_tokens_;
  }

  bool operator==(const Vocabulary& other) const {
    return input_tokens_ == other.input_tokens_ &&
           output_tokens_ == other.output_tokens_;
  }

 private:
  std::vector<std::string> input_tokens_;
  std::vector<std::string> output_tokens_;
  std::unordered_map<std::string, int> input_ids_;
  std::unordered_map<std::string, int> output_ids_;
};

Vocabulary build_vocab(const Corpus& corpus);

// [S_start] subtags(source_tag) subtags(target_tag) chars(source_form) [S_end],
// each mapped to its id; unseen tokens become UNK.
std::vector<int> encode_input(const Sample& sample, const Vocabulary& vocab);

// [S_start] chars(form) [S_end]. Throws on an empty form.
std::vector<int> encode_output(std::string_view form, const Vocabulary& vocab);

struct DecodeResult {
  std::string form;
  bool terminated = false;  // an S_end token was seen
  bool had_unk = false;
};

// Strips specials, stops at the first S_end, drops UNK (flagged).
DecodeResult decode_output(const std::vector<int>& ids,
                           const Vocabulary& vocab);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);
std::string vocabulary_fingerprint(const Vocabulary& vocab);

}  // namespace med
