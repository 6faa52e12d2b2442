#include "med/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "med/adadelta.hpp"
#include "med/checkpoint.hpp"

namespace med::model {

namespace {

using nn::Id;
using nn::Tape;
using nn::Tensor;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::size_t> to_sizes(const std::vector<int>& ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(static_cast<std::size_t>(id));
  return out;
}

template <class Params, class Emit>
void walk_params(Params& p, Emit&& emit) {
  const auto gru = [&emit](const std::string& prefix, auto& g) {
    emit(prefix + ".wz", g.wz);
    emit(prefix + ".uz", g.uz);
    emit(prefix + ".bz", g.bz);
    emit(prefix + ".wr", g.wr);
    emit(prefix + ".ur", g.ur);
    emit(prefix + ".br", g.br);
    emit(prefix + ".w", g.w);
    emit(prefix + ".u", g.u);
    emit(prefix + ".b", g.b);
  };
  emit("embed.in", p.encoder.embeddings);
  gru("enc.fwd", p.encoder.fwd);
  gru("enc.bwd", p.encoder.bwd);
  emit("embed.out", p.decoder.embeddings);
  emit("dec.init.w", p.decoder.init_w);
  emit("dec.init.b", p.decoder.init_b);
  gru("dec.gru", p.decoder.gru);
  emit("att.ws", p.decoder.att.ws);
  emit("att.wh", p.decoder.att.wh);
  emit("att.v", p.decoder.att.v);
  for (std::size_t i = 0; i < p.decoder.readout.pieces.size(); ++i) {
    emit("read." + std::to_string(i) + ".w", p.decoder.readout.pieces[i].w);
    emit("read." + std::to_string(i) + ".b", p.decoder.readout.pieces[i].b);
  }
  emit("out.w", p.decoder.out_w);
  emit("out.b", p.decoder.out_b);
}

std::vector<std::pair<std::string, const Tensor*>> named_view(
    const ModelParams& params) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  walk_params(params, [&out](const std::string& name, const Tensor& t) {
    out.emplace_back(name, &t);
  });
  return out;
}

ordered_json config_to_json(const Config& c) {
  ordered_json j;
  j["hidden_size"] = c.hidden_size;
  j["embedding_size"] = c.embedding_size;
  j["maxout_pieces"] = c.maxout_pieces;
  j["minibatch_size"] = c.minibatch_size;
  j["iterations"] = c.iterations;
  j["clip_norm"] = c.clip_norm;
  j["adadelta_rho"] = c.adadelta_rho;
  j["adadelta_eps"] = c.adadelta_eps;
  j["max_decode_length"] = c.max_decode_length;
  j["beam_width"] = c.beam_width;
  j["seed"] = c.seed;
  return j;
}

Config config_from_json(const ordered_json& j) {
  Config c;
  c.hidden_size = j.at("hidden_size").get<std::size_t>();
  c.embedding_size = j.at("embedding_size").get<std::size_t>();
  c.maxout_pieces = j.at("maxout_pieces").get<std::size_t>();
  c.minibatch_size = j.at("minibatch_size").get<std::size_t>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.adadelta_rho = j.at("adadelta_rho").get<double>();
  c.adadelta_eps = j.at("adadelta_eps").get<double>();
  c.max_decode_length = j.at("max_decode_length").get<std::size_t>();
  c.beam_width = j.at("beam_width").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void set_config_key(Config& c, const std::string& key,
                    const std::string& value) {
  try {
    if (key == "hidden_size") {
      c.hidden_size = std::stoull(value);
    } else if (key == "embedding_size") {
      c.embedding_size = std::stoull(value);
    } else if (key == "maxout_pieces") {
      c.maxout_pieces = std::stoull(value);
    } else if (key == "minibatch_size") {
      c.minibatch_size = std::stoull(value);
    } else if (key == "iterations") {
      c.iterations = std::stoull(value);
    } else if (key == "clip_norm") {
      c.clip_norm = std::stod(value);
    } else if (key == "adadelta_rho") {
      c.adadelta_rho = std::stod(value);
    } else if (key == "adadelta_eps") {
      c.adadelta_eps = std::stod(value);
    } else if (key == "max_decode_length") {
      c.max_decode_length = std::stoull(value);
    } else if (key == "beam_width") {
      c.beam_width = std::stoull(value);
    } else if (key == "seed") {
      c.seed = std::stoull(value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad value for '" + key + "': " +
                                value);
  }
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct EncodedSample {
  std::vector<std::size_t> input;
  std::vector<std::size_t> output;
};

struct DecodeSetup {
  std::vector<Id> annotations;
  std::vector<Id> projected;
  Id s0;
};

DecodeSetup decode_setup(Tape& tape, const ModelParams& params,
                         const std::vector<std::size_t>& input_ids) {
  DecodeSetup d;
  Id bwd_first = 0;
  d.annotations =
      nn::encode_bidirectional(tape, params.encoder, input_ids, &bwd_first);
  d.s0 = nn::decoder_initial_state(tape, params.decoder, bwd_first);
  d.projected =
      nn::project_annotations(tape, params.decoder.att, d.annotations);
  return d;
}

std::size_t decode_cap(const Config& config, std::size_t input_len) {
  return config.max_decode_length ? config.max_decode_length : input_len + 10;
}

std::string greedy_decode(const Model& model,
                          const std::vector<std::size_t>& input_ids) {
  Tape tape;
  DecodeSetup d = decode_setup(tape, model.params, input_ids);
  const std::size_t cap = decode_cap(model.config, input_ids.size());
  std::vector<int> out_ids{Vocabulary::kStartId};
  Id state = d.s0;
  std::size_t y_prev = Vocabulary::kStartId;
  for (std::size_t step = 0; step < cap; ++step) {
    nn::DecoderStep ds = nn::decoder_step(tape, model.params.decoder, state,
                                          y_prev, d.annotations, d.projected);
    const Tensor& logits = tape.value(ds.logits);
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.numel(); ++i) {
      if (logits[i] > logits[best]) best = i;
    }
    out_ids.push_back(static_cast<int>(best));
    if (best == Vocabulary::kEndId) break;
    state = ds.state;
    y_prev = best;
  }
  return decode_output(out_ids, model.vocab).form;
}

std::string beam_decode(const Model& model,
                        const std::vector<std::size_t>& input_ids,
                        std::size_t width) {
  Tape tape;
  DecodeSetup d = decode_setup(tape, model.params, input_ids);
  const std::size_t cap = decode_cap(model.config, input_ids.size());

  struct Hyp {
    std::vector<int> ids;
    Id state;
    double logp = 0.0;
    bool done = false;
  };
  std::vector<Hyp> beam{{{Vocabulary::kStartId}, d.s0, 0.0, false}};

  for (std::size_t step = 0; step < cap; ++step) {
    bool any_open = false;
    for (const Hyp& h : beam) any_open |= !h.done;
    if (!any_open) break;

    struct Cand {
      double logp;
      std::size_t parent;
      int token;  // -1 carries a finished hypothesis forward
    };
    std::vector<Cand> cands;
    std::vector<Id> next_state(beam.size(), 0);
    for (std::size_t i = 0; i < beam.size(); ++i) {
      const Hyp& h = beam[i];
      if (h.done) {
        cands.push_back({h.logp, i, -1});
        continue;
      }
      nn::DecoderStep ds = nn::decoder_step(
          tape, model.params.decoder, h.state,
          static_cast<std::size_t>(h.ids.back()), d.annotations, d.projected);
      next_state[i] = ds.state;
      const Tensor& logits = tape.value(ds.logits);
      double max_l = logits[0];
      for (std::size_t v = 1; v < logits.numel(); ++v)
        max_l = std::max(max_l, logits[v]);
      double z = 0.0;
      for (std::size_t v = 0; v < logits.numel(); ++v)
        z += std::exp(logits[v] - max_l);
      const double log_z = std::log(z);
      for (std::size_t v = 0; v < logits.numel(); ++v) {
        cands.push_back(
            {h.logp + logits[v] - max_l - log_z, i, static_cast<int>(v)});
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) {
                       if (a.logp != b.logp) return a.logp > b.logp;
                       if (a.parent != b.parent) return a.parent < b.parent;
                       return a.token < b.token;
                     });
    std::vector<Hyp> next;
    for (const Cand& c : cands) {
      if (next.size() == width) break;
      if (c.token < 0) {
        next.push_back(beam[c.parent]);
        continue;
      }
      Hyp h;
      h.ids = beam[c.parent].ids;
      h.ids.push_back(c.token);
      h.state = next_state[c.parent];
      h.logp = c.logp;
      h.done = c.token == Vocabulary::kEndId;
      next.push_back(std::move(h));
    }
    beam = std::move(next);
  }

  const Hyp* best = nullptr;
  for (const Hyp& h : beam) {
    if (!h.done) continue;
    if (!best || h.logp > best->logp) best = &h;
  }
  if (!best) {
    for (const Hyp& h : beam) {
      if (!best || h.logp > best->logp) best = &h;
    }
  }
  return decode_output(best->ids, model.vocab).form;
}

}  // namespace

void Config::validate() const {
  if (hidden_size == 0 || embedding_size == 0 || maxout_pieces == 0 ||
      minibatch_size == 0)
    throw std::invalid_argument("config: sizes must be at least 1");
  if (beam_width == 0)
    throw std::invalid_argument("config: beam_width must be at least 1");
  if (max_decode_length == 1)
    throw std::invalid_argument(
        "config: max_decode_length must be 0 (auto) or at least 2");
  if (clip_norm < 0.0)
    throw std::invalid_argument("config: clip_norm must be nonnegative");
  if (adadelta_rho < 0.0 || adadelta_rho >= 1.0)
    throw std::invalid_argument("config: adadelta_rho must be in [0, 1)");
  if (adadelta_eps <= 0.0)
    throw std::invalid_argument("config: adadelta_eps must be positive");
}

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  Config c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value");
    set_config_key(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  c.validate();
  return c;
}

void Config::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("config: cannot open " + path);
  os << "hidden_size=" << hidden_size << "\n";
  os << "embedding_size=" << embedding_size << "\n";
  os << "maxout_pieces=" << maxout_pieces << "\n";
  os << "minibatch_size=" << minibatch_size << "\n";
  os << "iterations=" << iterations << "\n";
  os << "clip_norm=" << format_double(clip_norm) << "\n";
  os << "adadelta_rho=" << format_double(adadelta_rho) << "\n";
  os << "adadelta_eps=" << format_double(adadelta_eps) << "\n";
  os << "max_decode_length=" << max_decode_length << "\n";
  os << "beam_width=" << beam_width << "\n";
  os << "seed=" << seed << "\n";
}

std::vector<NamedParam> named_params(ModelParams& params) {
  std::vector<NamedParam> out;
  walk_params(params, [&out](const std::string& name, Tensor& t) {
    out.push_back({name, &t});
  });
  return out;
}

ModelParams init_params(const Config& config, std::size_t input_vocab,
                        std::size_t output_vocab, Rng& rng) {
  ModelParams p;
  p.encoder =
      nn::make_encoder(input_vocab, config.embedding_size, config.hidden_size);
  p.decoder = nn::make_decoder(output_vocab, config.embedding_size,
                               config.hidden_size, config.maxout_pieces, rng);
  return p;
}

nn::Id sequence_loss(Tape& tape, const ModelParams& params,
                     const std::vector<std::size_t>& input_ids,
                     const std::vector<std::size_t>& output_ids) {
  if (output_ids.size() < 2)
    throw std::invalid_argument("sequence_loss: output needs start and end");
  DecodeSetup d = decode_setup(tape, params, input_ids);
  Id state = d.s0;
  std::vector<Id> losses;
  losses.reserve(output_ids.size() - 1);
  for (std::size_t i = 1; i < output_ids.size(); ++i) {
    nn::DecoderStep ds = nn::decoder_step(
        tape, params.decoder, state, output_ids[i - 1], d.annotations,
        d.projected);
    losses.push_back(tape.softmax_xent(ds.logits, output_ids[i]));
    state = ds.state;
  }
  return tape.sum(losses);
}

Model train(const Corpus& corpus, const Config& config,
            const ProgressFn& progress) {
  config.validate();
  if (corpus.empty())
    throw std::invalid_argument("train: empty corpus");
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    if (!corpus.samples[i].target_form)
      throw std::invalid_argument("train: sample " + std::to_string(i + 1) +
                                  " has no target form");
  }

  Model model;
  model.vocab = build_vocab(corpus);
  model.config = config;
  Rng init_rng(derive_seed(config.seed, "init"));
  model.params = init_params(config, model.vocab.input_size(),
                             model.vocab.output_size(), init_rng);

  std::vector<EncodedSample> encoded;
  encoded.reserve(corpus.size());
  for (const Sample& s : corpus.samples) {
    encoded.push_back({to_sizes(encode_input(s, model.vocab)),
                       to_sizes(encode_output(*s.target_form, model.vocab))});
  }

  std::vector<NamedParam> named = named_params(model.params);
  std::vector<Tensor*> param_ptrs;
  std::vector<Tensor> acc;
  for (const NamedParam& np : named) {
    param_ptrs.push_back(np.tensor);
    acc.emplace_back(np.tensor->shape());
  }
  nn::Adadelta optimizer(param_ptrs,
                         {config.adadelta_rho, config.adadelta_eps});

  Rng shuffle_rng(derive_seed(config.seed, "batches"));
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();

  model.log.reserve(config.iterations);
  for (std::size_t iter = 1; iter <= config.iterations; ++iter) {
    if (cursor >= order.size()) {
      shuffle_rng.shuffle(order);
      cursor = 0;
    }
    const std::size_t batch_n =
        std::min(config.minibatch_size, order.size() - cursor);
    for (Tensor& a : acc) a.fill(0.0);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch_n; ++b) {
      const EncodedSample& es = encoded[order[cursor + b]];
      Tape tape;
      const Id root = sequence_loss(tape, model.params, es.input, es.output);
      tape.backward(root);
      loss_sum += tape.value(root)[0];
      for (std::size_t k = 0; k < named.size(); ++k) {
        const Tensor* g = tape.grad_of(*named[k].tensor);
        if (!g) continue;
        for (std::size_t j = 0; j < acc[k].numel(); ++j) acc[k][j] += (*g)[j];
      }
    }
    cursor += batch_n;
    const double inv = 1.0 / static_cast<double>(batch_n);
    const double mean_loss = loss_sum * inv;
    if (!std::isfinite(mean_loss))
      throw std::runtime_error("train: loss diverged at iteration " +
                               std::to_string(iter));
    for (Tensor& a : acc) {
      for (std::size_t j = 0; j < a.numel(); ++j) a[j] *= inv;
    }
    std::vector<const Tensor*> grad_ptrs;
    grad_ptrs.reserve(acc.size());
    for (const Tensor& a : acc) grad_ptrs.push_back(&a);
    optimizer.step(grad_ptrs, config.clip_norm);
    model.log.push_back({iter, mean_loss});
    if (progress) progress(iter, mean_loss);
  }
  return model;
}

std::string predict(const Model& model, const Sample& sample) {
  return predict(model, sample, model.config.beam_width);
}

std::string predict(const Model& model, const Sample& sample,
                    std::size_t beam_width) {
  if (beam_width == 0)
    throw std::invalid_argument("predict: beam width must be at least 1");
  const std::vector<std::size_t> input_ids =
      to_sizes(encode_input(sample, model.vocab));
  return beam_width == 1 ? greedy_decode(model, input_ids)
                         : beam_decode(model, input_ids, beam_width);
}

std::string majority_vote(const std::vector<std::string>& predictions,
                          Rng& rng) {
  if (predictions.empty())
    throw std::invalid_argument("majority_vote: no predictions");
  std::map<std::string, std::size_t> counts;
  for (const std::string& p : predictions) ++counts[p];
  std::size_t best = 0;
  for (const auto& [form, n] : counts) best = std::max(best, n);
  std::vector<const std::string*> modal;
  for (const auto& [form, n] : counts) {
    if (n == best) modal.push_back(&form);
  }
  if (modal.size() == 1) return *modal[0];
  return *modal[rng.below(modal.size())];
}

std::string ensemble_predict(const std::vector<const Model*>& models,
                             const Sample& sample, Rng& rng,
                             std::size_t beam_width) {
  if (models.empty())
    throw std::invalid_argument("ensemble: no models");
  for (const Model* m : models) {
    if (!(m->vocab == models[0]->vocab))
      throw std::invalid_argument("ensemble: members use different vocabularies");
  }
  std::vector<std::string> predictions;
  predictions.reserve(models.size());
  for (const Model* m : models) {
    predictions.push_back(
        predict(*m, sample, beam_width ? beam_width : m->config.beam_width));
  }
  return majority_vote(predictions, rng);
}

void save_model(const Model& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_vocabulary(model.vocab, dir + "/vocab.json");
  write_checkpoint(dir + "/params.bin", named_view(model.params));
  ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["config"] = config_to_json(model.config);
  manifest["vocab_hash"] = vocabulary_fingerprint(model.vocab);
  ordered_json tail = ordered_json::array();
  const std::size_t keep = 20;
  const std::size_t from = model.log.size() > keep ? model.log.size() - keep : 0;
  for (std::size_t i = from; i < model.log.size(); ++i)
    tail.push_back({model.log[i].iteration, model.log[i].loss});
  manifest["log_tail"] = std::move(tail);
  std::ofstream os(dir + "/manifest.json");
  if (!os) throw std::runtime_error("model: cannot write manifest in " + dir);
  os << manifest.dump(2) << "\n";
}

Model load_model(const std::string& dir) {
  std::ifstream is(dir + "/manifest.json");
  if (!is) throw std::runtime_error("model: cannot open " + dir + "/manifest.json");
  ordered_json manifest;
  try {
    is >> manifest;
  } catch (const std::exception& e) {
    throw std::runtime_error("model: bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format_version", 0) != 1)
    throw std::runtime_error("model: unsupported manifest version in " + dir);

  Model model;
  model.config = config_from_json(manifest.at("config"));
  model.config.validate();
  model.vocab = load_vocabulary(dir + "/vocab.json");
  const std::string expect = manifest.at("vocab_hash").get<std::string>();
  if (vocabulary_fingerprint(model.vocab) != expect)
    throw std::runtime_error("model: vocabulary hash mismatch in " + dir);

  Rng dummy(0);
  model.params = init_params(model.config, model.vocab.input_size(),
                             model.vocab.output_size(), dummy);
  auto stored = nn::read_checkpoint(dir + "/params.bin");
  std::vector<NamedParam> named = named_params(model.params);
  for (NamedParam& np : named) {
    auto it = stored.find(np.name);
    if (it == stored.end())
      throw std::runtime_error("model: checkpoint misses tensor " + np.name);
    if (!it->second.same_shape(*np.tensor))
      throw std::runtime_error("model: shape mismatch for tensor " + np.name);
    *np.tensor = std::move(it->second);
    stored.erase(it);
  }
  if (!stored.empty())
    throw std::runtime_error("model: checkpoint has unknown tensor " +
                             stored.begin()->first);
  for (const auto& entry : manifest.at("log_tail")) {
    model.log.push_back({entry.at(0).get<std::size_t>(),
                         entry.at(1).get<double>()});
  }
  return model;
}

}  // namespace med::model
