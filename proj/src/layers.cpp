#include "med/layers.hpp"

#include <stdexcept>

namespace med::nn {

namespace {

Tensor init_matrix(std::size_t rows, std::size_t cols, WeightInit init,
                   Rng* rng) {
  if (init == WeightInit::kIdentity) return identity_init(rows, cols);
  if (!rng) throw std::invalid_argument("glorot init needs an rng");
  return glorot_init(rows, cols, *rng);
}

}  // namespace

GruParams make_gru(std::size_t input_dim, std::size_t hidden_dim,
                   WeightInit init, Rng* rng) {
  GruParams p;
  p.wz = init_matrix(hidden_dim, input_dim, init, rng);
  p.uz = init_matrix(hidden_dim, hidden_dim, init, rng);
  p.bz = zero_init({hidden_dim});
  p.wr = init_matrix(hidden_dim, input_dim, init, rng);
  p.ur = init_matrix(hidden_dim, hidden_dim, init, rng);
  p.br = zero_init({hidden_dim});
  p.w = init_matrix(hidden_dim, input_dim, init, rng);
  p.u = init_matrix(hidden_dim, hidden_dim, init, rng);
  p.b = zero_init({hidden_dim});
  return p;
}

Id gru_step(Tape& t, const GruParams& p, Id x, Id h_prev) {
  const Id z = t.sigmoid(t.add(
      t.add(t.matvec(t.leaf(p.wz), x), t.matvec(t.leaf(p.uz), h_prev)),
      t.leaf(p.bz)));
  const Id r = t.sigmoid(t.add(
      t.add(t.matvec(t.leaf(p.wr), x), t.matvec(t.leaf(p.ur), h_prev)),
      t.leaf(p.br)));
  const Id c = t.tanh(t.add(
      t.add(t.matvec(t.leaf(p.w), x),
            t.matvec(t.leaf(p.u), t.mul(r, h_prev))),
      t.leaf(p.b)));
  return t.lerp(z, h_prev, c);
}

AttentionParams make_attention(std::size_t state_dim,
                               std::size_t annotation_dim,
                               std::size_t att_dim) {
  AttentionParams p;
  p.ws = identity_init(att_dim, state_dim);
  p.wh = identity_init(att_dim, annotation_dim);
  p.v = Tensor::vector(att_dim);
  p.v[0] = 1.0;
  return p;
}

std::vector<Id> project_annotations(Tape& t, const AttentionParams& p,
                                    const std::vector<Id>& annotations) {
  const Id wh = t.leaf(p.wh);
  std::vector<Id> projected;
  projected.reserve(annotations.size());
  for (Id h : annotations) projected.push_back(t.matvec(wh, h));
  return projected;
}

AttentionResult attention(Tape& t, const AttentionParams& p, Id state,
                          const std::vector<Id>& annotations,
                          const std::vector<Id>& projected) {
  if (annotations.empty() || annotations.size() != projected.size())
    throw std::invalid_argument("attention: bad annotation set");
  const Id ws_s = t.matvec(t.leaf(p.ws), state);
  const Id v = t.leaf(p.v);
  std::vector<Id> energies;
  energies.reserve(annotations.size());
  for (Id proj : projected)
    energies.push_back(t.dot(v, t.tanh(t.add(ws_s, proj))));
  AttentionResult r;
  r.context = t.attend(energies, annotations, &r.weights);
  return r;
}

AttentionResult attention(Tape& t, const AttentionParams& p, Id state,
                          const std::vector<Id>& annotations) {
  return attention(t, p, state, annotations,
                   project_annotations(t, p, annotations));
}

MaxoutParams make_maxout(std::size_t input_dim, std::size_t output_dim,
                         std::size_t k, WeightInit init, Rng* rng) {
  if (k == 0) throw std::invalid_argument("maxout needs at least one piece");
  MaxoutParams p;
  p.pieces.resize(k);
  for (auto& piece : p.pieces) {
    piece.w = init_matrix(output_dim, input_dim, init, rng);
    piece.b = zero_init({output_dim});
  }
  return p;
}

Id maxout(Tape& t, const MaxoutParams& p, Id x) {
  if (p.pieces.empty())
    throw std::invalid_argument("maxout needs at least one piece");
  Id best = 0;
  bool first = true;
  for (const auto& piece : p.pieces) {
    const Id affine = t.add(t.matvec(t.leaf(piece.w), x), t.leaf(piece.b));
    best = first ? affine : t.max_elem(best, affine);
    first = false;
  }
  return best;
}

EncoderParams make_encoder(std::size_t vocab_size, std::size_t embedding_dim,
                           std::size_t hidden_dim) {
  EncoderParams p;
  p.embeddings = identity_init(vocab_size, embedding_dim);
  p.fwd = make_gru(embedding_dim, hidden_dim, WeightInit::kIdentity);
  p.bwd = make_gru(embedding_dim, hidden_dim, WeightInit::kIdentity);
  return p;
}

std::vector<Id> encode_bidirectional(Tape& t, const EncoderParams& p,
                                     const std::vector<std::size_t>& input_ids,
                                     Id* backward_first) {
  if (input_ids.empty())
    throw std::invalid_argument("encoder: empty input sequence");
  const std::size_t n = input_ids.size();
  const std::size_t hidden = p.fwd.bz.numel();
  const Id emb = t.leaf(p.embeddings);

  std::vector<Id> xs;
  xs.reserve(n);
  for (std::size_t id : input_ids) xs.push_back(t.row(emb, id));

  std::vector<Id> fwd(n), bwd(n);
  Id h = t.constant(Tensor::vector(hidden));
  for (std::size_t j = 0; j < n; ++j) {
    h = gru_step(t, p.fwd, xs[j], h);
    fwd[j] = h;
  }
  h = t.constant(Tensor::vector(hidden));
  for (std::size_t j = n; j-- > 0;) {
    h = gru_step(t, p.bwd, xs[j], h);
    bwd[j] = h;
  }
  if (backward_first) *backward_first = bwd[0];

  std::vector<Id> annotations;
  annotations.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    annotations.push_back(t.concat({fwd[j], bwd[j]}));
  return annotations;
}

DecoderParams make_decoder(std::size_t vocab_size, std::size_t embedding_dim,
                           std::size_t hidden_dim, std::size_t maxout_k,
                           Rng& rng) {
  DecoderParams p;
  p.embeddings = identity_init(vocab_size, embedding_dim);
  p.init_w = identity_init(hidden_dim, hidden_dim);
  p.init_b = zero_init({hidden_dim});
  p.gru = make_gru(embedding_dim + 2 * hidden_dim, hidden_dim,
                   WeightInit::kGlorot, &rng);
  p.att = make_attention(hidden_dim, 2 * hidden_dim, hidden_dim);
  p.readout = make_maxout(hidden_dim + embedding_dim + 2 * hidden_dim,
                          hidden_dim, maxout_k, WeightInit::kIdentity);
  p.out_w = identity_init(vocab_size, hidden_dim);
  p.out_b = zero_init({vocab_size});
  return p;
}

Id decoder_initial_state(Tape& t, const DecoderParams& p, Id backward_first) {
  return t.tanh(
      t.add(t.matvec(t.leaf(p.init_w), backward_first), t.leaf(p.init_b)));
}

DecoderStep decoder_step(Tape& t, const DecoderParams& p, Id s_prev,
                         std::size_t y_prev_id,
                         const std::vector<Id>& annotations,
                         const std::vector<Id>& projected) {
  if (y_prev_id >= p.embeddings.rows())
    throw std::out_of_range("decoder: symbol id out of range");
  const Id y_emb = t.row(t.leaf(p.embeddings), y_prev_id);
  AttentionResult att = attention(t, p.att, s_prev, annotations, projected);
  const Id state = gru_step(t, p.gru, t.concat({y_emb, att.context}), s_prev);
  const Id read = maxout(t, p.readout, t.concat({state, y_emb, att.context}));
  DecoderStep step;
  step.state = state;
  step.logits = t.add(t.matvec(t.leaf(p.out_w), read), t.leaf(p.out_b));
  step.att_weights = std::move(att.weights);
  return step;
}

}  // namespace med::nn
