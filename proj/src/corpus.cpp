#include "med/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "med/rng.hpp"
#include "med/utf8.hpp"

#include "json.hpp"

namespace med {

namespace {

constexpr int kVocabFormatVersion = 1;

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

Corpus Corpus::from_samples(std::vector<Sample> samples) {
  Corpus c;
  c.samples = std::move(samples);
  for (const Sample& s : c.samples) {
    c.tag_pairs.emplace(s.source_tag, s.target_tag);
  }
  return c;
}

std::vector<std::string> parse_tag(std::string_view raw, TagSide side) {
  if (raw.empty()) throw std::invalid_argument("malformed tag: empty");
  const char* prefix = side == TagSide::kInput ? "IN=" : "OUT=";
  std::vector<std::string> tokens;
  for (std::string& subtag : split(raw, ',')) {
    if (subtag.empty())
      throw std::invalid_argument("malformed tag: empty subtag in \"" +
                                  std::string(raw) + "\"");
    tokens.push_back(prefix + subtag);
  }
  return tokens;
}

Corpus load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 3 && fields.size() != 4) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 4 tab-separated fields, got " +
                               std::to_string(fields.size()));
    }
    Sample s;
    s.source_tag = std::move(fields[0]);
    s.source_form = std::move(fields[1]);
    s.target_tag = std::move(fields[2]);
    if (fields.size() == 4 && !fields[3].empty()) s.target_form = std::move(fields[3]);
    if (s.source_form.empty()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": empty source form");
    }
    if (s.source_tag.empty() || s.target_tag.empty()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": empty tag");
    }
    samples.push_back(std::move(s));
  }
  return Corpus::from_samples(std::move(samples));
}

void save_tsv(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const Sample& s : corpus.samples) {
    out << s.source_tag << '\t' << s.source_form << '\t' << s.target_tag;
    out << '\t' << (s.target_form ? *s.target_form : "");
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vocabulary::Vocabulary(std::vector<std::string> input_tokens,
                       std::vector<std::string> output_tokens)
    : input_tokens_(std::move(input_tokens)),
      output_tokens_(std::move(output_tokens)) {
  auto index = [](const std::vector<std::string>& tokens,
                  std::unordered_map<std::string, int>& ids) {
    ids.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!ids.emplace(tokens[i], static_cast<int>(i)).second)
        throw std::invalid_argument("duplicate vocabulary token: " + tokens[i]);
    }
  };
  index(input_tokens_, input_ids_);
  index(output_tokens_, output_ids_);
  for (const char* special : {kStart, kEnd, kUnk}) {
    if (!input_ids_.count(special) || !output_ids_.count(special))
      throw std::invalid_argument("vocabulary missing special token");
  }
}

int Vocabulary::input_id(const std::string& token) const {
  auto it = input_ids_.find(token);
  return it == input_ids_.end() ? kUnkId : it->second;
}

int Vocabulary::output_id(const std::string& token) const {
  auto it = output_ids_.find(token);
  return it == output_ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::input_token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= input_tokens_.size())
    throw std::out_of_range("input token id " + std::to_string(id));
  return input_tokens_[static_cast<std::size_t>(id)];
}

const std::string& Vocabulary::output_token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= output_tokens_.size())
    throw std::out_of_range("output token id " + std::to_string(id));
  return output_tokens_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocab(const Corpus& corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  std::set<std::string> subtags;    // both sides, already prefixed
  std::set<std::string> alphabet;   // single-codepoint strings
  auto add_chars = [&alphabet](const std::string& form) {
    for (char32_t c : utf8::decode(form)) alphabet.insert(utf8::encode(c));
  };
  for (const Sample& s : corpus.samples) {
    for (auto& t : parse_tag(s.source_tag, TagSide::kInput)) subtags.insert(std::move(t));
    for (auto& t : parse_tag(s.target_tag, TagSide::kOutput)) subtags.insert(std::move(t));
    add_chars(s.source_form);
    if (s.target_form) add_chars(*s.target_form);
  }
  std::vector<std::string> input{Vocabulary::kStart, Vocabulary::kEnd,
                                 Vocabulary::kUnk};
  std::vector<std::string> output = input;
  // std::set iterates sorted, so ids are content-deterministic.
  for (const std::string& t : subtags) input.push_back(t);
  for (const std::string& c : alphabet) {
    input.push_back(c);
    output.push_back(c);
  }
  return Vocabulary(std::move(input), std::move(output));
}

std::vector<int> encode_input(const Sample& sample, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.push_back(Vocabulary::kStartId);
  for (const std::string& t : parse_tag(sample.source_tag, TagSide::kInput))
    ids.push_back(vocab.input_id(t));
  for (const std::string& t : parse_tag(sample.target_tag, TagSide::kOutput))
    ids.push_back(vocab.input_id(t));
  for (char32_t c : utf8::decode(sample.source_form))
    ids.push_back(vocab.input_id(utf8::encode(c)));
  ids.push_back(Vocabulary::kEndId);
  return ids;
}

std::vector<int> encode_output(std::string_view form, const Vocabulary& vocab) {
  if (form.empty()) throw std::invalid_argument("cannot encode an empty form");
  std::vector<int> ids;
  ids.push_back(Vocabulary::kStartId);
  for (char32_t c : utf8::decode(form))
    ids.push_back(vocab.output_id(utf8::encode(c)));
  ids.push_back(Vocabulary::kEndId);
  return ids;
}

DecodeResult decode_output(const std::vector<int>& ids,
                           const Vocabulary& vocab) {
  DecodeResult result;
  for (int id : ids) {
    if (id == Vocabulary::kEndId) {
      result.terminated = true;
      break;
    }
    if (id == Vocabulary::kStartId) continue;
    if (id == Vocabulary::kUnkId) {
      result.had_unk = true;
      continue;
    }
    result.form += vocab.output_token(id);
  }
  return result;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  nlohmann::json j;
  j["format_version"] = kVocabFormatVersion;
  j["input_tokens"] = vocab.input_tokens();
  j["output_tokens"] = vocab.output_tokens();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (!j.contains("format_version") ||
      j["format_version"].get<int>() != kVocabFormatVersion)
    throw std::runtime_error(path + ": unsupported vocabulary format version");
  return Vocabulary(j["input_tokens"].get<std::vector<std::string>>(),
                    j["output_tokens"].get<std::vector<std::string>>());
}

std::string vocabulary_fingerprint(const Vocabulary& vocab) {
  std::uint64_t h = fnv1a("vocab");
  for (const std::string& t : vocab.input_tokens()) h = fnv1a(t, fnv1a("\x1f", h));
  h = fnv1a("\x1e", h);
  for (const std::string& t : vocab.output_tokens()) h = fnv1a(t, fnv1a("\x1f", h));
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace med
