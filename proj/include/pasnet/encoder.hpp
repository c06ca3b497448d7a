#pragma once

#include <span>
#include <vector>

#include "pasnet/config.hpp"
#include "pasnet/corpus.hpp"
#include "pasnet/ops.hpp"
#include "pasnet/params.hpp"

namespace pasnet {

// One GRU layer. Rows of `w` and `b` are stacked [update; reset; candidate],
// `u_zr` holds the update and reset recurrences, `u_h` the candidate one.
template <typename T>
struct GruLayer {
  Parameter<T>* w = nullptr;     // [3d x input]
  Parameter<T>* u_zr = nullptr;  // [2d x d]
  Parameter<T>* u_h = nullptr;   // [d x d]
  Parameter<T>* b = nullptr;     // [3d]

  std::size_t hidden() const { return u_h->value.dim(0); }
  std::size_t input() const { return w->value.dim(1); }
};

template <typename T>
struct EncoderParams {
  Parameter<T>* embedding = nullptr;  // [V x d_w], row 0 is UNK
  std::vector<GruLayer<T>> layers;    // layers[k - 1] is layer k
};

// Width of h^0: embedding plus one (target flag) or two (MP flag) columns.
std::size_t input_width(const HyperConfig& cfg);

// Creates "embed" and "enc.<k>.{W,U_zr,U_h,b}". With `cross_width` > 0 every
// layer's input is widened by that many columns (Grid baseline).
template <typename T>
EncoderParams<T> add_encoder_params(ParamStore<T>& store, const HyperConfig& cfg, std::size_t vocab_size,
                                    std::size_t cross_width = 0);

struct RunOptions {
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout
  double dropout_rate = 0.0;

  bool dropout_active() const { return training && dropout_rate > 0.0; }
};

// The [n x 1] or [n x 2] binary columns appended to the embeddings for
// target predicate i.
template <typename T>
Tensor<T> predicate_flags(const Sentence& s, std::size_t i, bool mp_enabled);

// h^0_{i,1..n} as an [n x input_width] matrix. `embedded` is the shared
// [n x d_w] embedding lookup of the sentence.
template <typename T>
Var<T> embed_inputs(Var<T> embedded, const Sentence& s, std::size_t i, bool mp_enabled);

// Single GRU step on a pre-projected input xp = W x + b ([3d]).
template <typename T>
Var<T> gru_step(Var<T> xp, Var<T> h_prev, Var<T> u_zr, Var<T> u_h);

// z = s(W_z x + U_z h + b_z), r = s(W_r x + U_r h + b_r),
// c = tanh(W_h x + U_h (r * h) + b_h), h' = (1 - z) * h + z * c.
template <typename T>
Var<T> gru_cell(Var<T> x, Var<T> h_prev, const GruLayer<T>& layer);

// Runs one layer over an [n x input] sequence, zero boundary state.
template <typename T>
Var<T> gru_sequence(Var<T> x, const GruLayer<T>& layer, bool reverse);

// Alternating stack: layer 1 left to right without residual, then
// h^k = h^{k-1} + r^k(h^{k-1}) with odd layers left to right and even
// layers right to left. Dropout is applied to each layer's input.
// `intermediates`, when given, receives h^1..h^K.
template <typename T>
Var<T> run_stack(Var<T> h0, std::span<const GruLayer<T>> layers, const RunOptions& opts,
                 std::vector<Var<T>>* intermediates = nullptr);

// Independent per-predicate passes; element i is h^K_{i,.} as [n x d_r].
template <typename T>
std::vector<Var<T>> encode_sentence(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids,
                                    const EncoderParams<T>& params, const HyperConfig& cfg, const RunOptions& opts);

}  // namespace pasnet
