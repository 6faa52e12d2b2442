#pragma once

#include <cstddef>
#include <vector>

#include "med/rng.hpp"
#include "med/tape.hpp"
#include "med/tensor.hpp"

namespace med::nn {

using Id = Tape::Id;

enum class WeightInit { kIdentity, kGlorot };

// Gated recurrent unit.
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   c = tanh(W x + U (r * h) + b)
//   h' = (1 - z) * h + z * c
struct GruParams {
  Tensor wz, uz, bz;
  Tensor wr, ur, br;
  Tensor w, u, b;
};

GruParams make_gru(std::size_t input_dim, std::size_t hidden_dim,
                   WeightInit init, Rng* rng = nullptr);

Id gru_step(Tape& t, const GruParams& p, Id x, Id h_prev);

// Additive attention energy e_j = v . tanh(Ws s + Wh h_j).
struct AttentionParams {
  Tensor ws;  // att x state
  Tensor wh;  // att x annotation
  Tensor v;   // att
};

AttentionParams make_attention(std::size_t state_dim,
                               std::size_t annotation_dim,
                               std::size_t att_dim);

// Wh h_j for every annotation, computed once per sequence.
std::vector<Id> project_annotations(Tape& t, const AttentionParams& p,
                                    const std::vector<Id>& annotations);

struct AttentionResult {
  Id context;
  Tensor weights;
};

AttentionResult attention(Tape& t, const AttentionParams& p, Id state,
                          const std::vector<Id>& annotations,
                          const std::vector<Id>& projected);
AttentionResult attention(Tape& t, const AttentionParams& p, Id state,
                          const std::vector<Id>& annotations);

// Maxout: elementwise max over k affine maps of the input. Ties keep the
// earliest piece.
struct MaxoutParams {
  struct Piece {
    Tensor w;
    Tensor b;
  };
  std::vector<Piece> pieces;
};

MaxoutParams make_maxout(std::size_t input_dim, std::size_t output_dim,
                         std::size_t k, WeightInit init, Rng* rng = nullptr);

Id maxout(Tape& t, const MaxoutParams& p, Id x);

// Bidirectional GRU encoder over embedded symbols. Annotation j is the
// concatenation of the forward and backward states at position j.
struct EncoderParams {
  Tensor embeddings;  // vocab x embedding
  GruParams fwd;
  GruParams bwd;
};

EncoderParams make_encoder(std::size_t vocab_size, std::size_t embedding_dim,
                           std::size_t hidden_dim);

// Returns one annotation per input symbol. If backward_first is given it
// receives the backward state at position 0, the seed for the decoder state.
std::vector<Id> encode_bidirectional(Tape& t, const EncoderParams& p,
                                     const std::vector<std::size_t>& input_ids,
                                     Id* backward_first = nullptr);

// Attention decoder: the recurrence consumes the previous output symbol's
// embedding and the attention context, the readout is a maxout over the
// state, the embedding, and the context.
struct DecoderParams {
  Tensor embeddings;  // vocab x embedding
  Tensor init_w;      // hidden x hidden
  Tensor init_b;      // hidden
  GruParams gru;      // input: embedding + 2*hidden
  AttentionParams att;
  MaxoutParams readout;  // (hidden + embedding + 2*hidden) -> hidden
  Tensor out_w;          // vocab x hidden
  Tensor out_b;          // vocab
};

DecoderParams make_decoder(std::size_t vocab_size, std::size_t embedding_dim,
                           std::size_t hidden_dim, std::size_t maxout_k,
                           Rng& rng);

// s0 = tanh(init_w * backward_first + init_b).
Id decoder_initial_state(Tape& t, const DecoderParams& p, Id backward_first);

struct DecoderStep {
  Id state;
  Id logits;
  Tensor att_weights;
};

DecoderStep decoder_step(Tape& t, const DecoderParams& p, Id s_prev,
                         std::size_t y_prev_id,
                         const std::vector<Id>& annotations,
                         const std::vector<Id>& projected);

}  // namespace med::nn
