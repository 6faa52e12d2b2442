#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "med/corpus.hpp"
#include "med/layers.hpp"
#include "med/rng.hpp"

namespace med::model {

struct Config {
  std::size_t hidden_size = 100;
  std::size_t embedding_size = 100;
  std::size_t maxout_pieces = 2;
  std::size_t minibatch_size = 20;
  std::size_t iterations = 20000;
  double clip_norm = 1.0;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  std::size_t max_decode_length = 0;  // 0: input length + 10
  std::size_t beam_width = 1;         // 1: greedy
  std::uint64_t seed = 0;

  void validate() const;

  // Flat key=value text, one pair per line, '#' comments.
  static Config from_file(const std::string& path);
  void save(const std::string& path) const;
};

struct ModelParams {
  nn::EncoderParams encoder;
  nn::DecoderParams decoder;
};

struct NamedParam {
  std::string name;
  nn::Tensor* tensor;
};

// Stable name/order contract for checkpoints and the optimizer.
std::vector<NamedParam> named_params(ModelParams& params);

// Identity everywhere, zero biases, Glorot for the decoder GRU.
ModelParams init_params(const Config& config, std::size_t input_vocab,
                        std::size_t output_vocab, Rng& rng);

struct LogEntry {
  std::size_t iteration;
  double loss;
};

struct Model {
  Vocabulary vocab;
  Config config;
  ModelParams params;
  std::vector<LogEntry> log;
};

// Summed cross-entropy of one teacher-forced output sequence. output_ids must
// carry the start and end symbols.
nn::Id sequence_loss(nn::Tape& tape, const ModelParams& params,
                     const std::vector<std::size_t>& input_ids,
                     const std::vector<std::size_t>& output_ids);

using ProgressFn = std::function<void(std::size_t iteration, double loss)>;

// One model over every tag pair in the corpus: `iterations` minibatch
// Adadelta updates over seeded epoch shuffles, loss averaged per batch.
Model train(const Corpus& corpus, const Config& config,
            const ProgressFn& progress = nullptr);

// Greedy rollout (beam_width 1) or beam search without length normalization;
// stops at the end symbol or the decode-length cap.
std::string predict(const Model& model, const Sample& sample);
std::string predict(const Model& model, const Sample& sample,
                    std::size_t beam_width);

// Most frequent string; ties drawn uniformly via rng (consumed only on a
// real tie).
std::string majority_vote(const std::vector<std::string>& predictions,
                          Rng& rng);

// Each member predicts with its own beam width; beam_width > 0 overrides all.
std::string ensemble_predict(const std::vector<const Model*>& models,
                             const Sample& sample, Rng& rng,
                             std::size_t beam_width = 0);

// Model directory: manifest.json + vocab.json + params.bin.
void save_model(const Model& model, const std::string& dir);
Model load_model(const std::string& dir);

}  // namespace med::model
