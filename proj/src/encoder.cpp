#include "pasnet/encoder.hpp"

#include <algorithm>
#include <string>

namespace pasnet {

std::size_t input_width(const HyperConfig& cfg) { return cfg.d_w + (cfg.mp_enabled ? 2 : 1); }

template <typename T>
EncoderParams<T> add_encoder_params(ParamStore<T>& store, const HyperConfig& cfg, std::size_t vocab_size,
                                    std::size_t cross_width) {
  EncoderParams<T> p;
  p.embedding = &store.add("embed", {vocab_size, cfg.d_w});
  const std::size_t d = cfg.d_r;
  for (std::size_t k = 1; k <= cfg.K; ++k) {
    const std::size_t in = (k == 1 ? input_width(cfg) : d) + cross_width;
    const std::string prefix = "enc." + std::to_string(k) + ".";
    GruLayer<T> layer;
    layer.w = &store.add(prefix + "W", {3 * d, in});
    layer.u_zr = &store.add(prefix + "U_zr", {2 * d, d});
    layer.u_h = &store.add(prefix + "U_h", {d, d});
    layer.b = &store.add(prefix + "b", {3 * d});
    p.layers.push_back(layer);
  }
  return p;
}

template <typename T>
Tensor<T> predicate_flags(const Sentence& s, std::size_t i, bool mp_enabled) {
  const std::size_t n = s.n();
  const std::size_t cols = mp_enabled ? 2 : 1;
  Tensor<T> flags({n, cols});
  flags.at(static_cast<std::size_t>(s.predicates.at(i)), 0) = T(1);
  if (mp_enabled) {
    for (int p : s.predicates) flags.at(static_cast<std::size_t>(p), 1) = T(1);
  }
  return flags;
}

template <typename T>
Var<T> embed_inputs(Var<T> embedded, const Sentence& s, std::size_t i, bool mp_enabled) {
  if (i >= s.q()) throw UsageError("embed_inputs: predicate " + std::to_string(i) + " out of range");
  return concat(embedded, embedded.tape->constant(predicate_flags<T>(s, i, mp_enabled)));
}

template <typename T>
Var<T> gru_step(Var<T> xp, Var<T> h_prev, Var<T> u_zr, Var<T> u_h) {
  const std::size_t d = h_prev.value().size();
  if (xp.value().size() != 3 * d) {
    throw DimensionError("gru_step: projected input " + shape_string(xp.shape()) + " does not match hidden " +
                         shape_string(h_prev.shape()));
  }
  Var<T> zr = sigmoid(add(slice(xp, 0, 2 * d), linear(u_zr, h_prev)));
  Var<T> z = slice(zr, 0, d);
  Var<T> r = slice(zr, d, d);
  Var<T> cand = tanh(add(slice(xp, 2 * d, d), linear(u_h, mul(r, h_prev))));
  return add(h_prev, mul(z, sub(cand, h_prev)));
}

template <typename T>
Var<T> gru_cell(Var<T> x, Var<T> h_prev, const GruLayer<T>& layer) {
  Tape<T>& tape = *x.tape;
  if (x.value().size() != layer.input() || h_prev.value().size() != layer.hidden()) {
    throw DimensionError("gru_cell: input " + shape_string(x.shape()) + " / state " + shape_string(h_prev.shape()) +
                         " do not match layer " + shape_string(layer.w->value.shape()));
  }
  Var<T> xp = affine(tape.parameter(*layer.w), x, tape.parameter(*layer.b));
  return gru_step(xp, h_prev, tape.parameter(*layer.u_zr), tape.parameter(*layer.u_h));
}

template <typename T>
Var<T> gru_sequence(Var<T> x, const GruLayer<T>& layer, bool reverse) {
  Tape<T>& tape = *x.tape;
  const std::size_t n = x.value().dim(0);
  const std::size_t d = layer.hidden();
  Var<T> proj = affine(tape.parameter(*layer.w), x, tape.parameter(*layer.b));
  Var<T> u_zr = tape.parameter(*layer.u_zr);
  Var<T> u_h = tape.parameter(*layer.u_h);
  Var<T> h = tape.constant(Tensor<T>({d}));
  std::vector<Var<T>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    h = gru_step(row(proj, t), h, u_zr, u_h);
    out[t] = h;
  }
  return stack<T>(out);
}

template <typename T>
Var<T> run_stack(Var<T> h0, std::span<const GruLayer<T>> layers, const RunOptions& opts,
                 std::vector<Var<T>>* intermediates) {
  if (layers.empty()) throw UsageError("run_stack: need at least one layer");
  Var<T> h = h0;
  for (std::size_t k = 1; k <= layers.size(); ++k) {
    Var<T> in = opts.dropout_active() ? dropout(h, opts.dropout_rate, *opts.rng) : h;
    Var<T> r = gru_sequence(in, layers[k - 1], /*reverse=*/k % 2 == 0);
    h = k == 1 ? r : add(h, r);
    if (intermediates) intermediates->push_back(h);
  }
  return h;
}

template <typename T>
std::vector<Var<T>> encode_sentence(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids,
                                    const EncoderParams<T>& params, const HyperConfig& cfg, const RunOptions& opts) {
  if (s.q() == 0) throw UsageError("encode_sentence: sentence " + s.id + " has no predicates");
  Var<T> embedded = gather_rows(tape.parameter(*params.embedding), ids);
  std::vector<Var<T>> rows;
  rows.reserve(s.q());
  for (std::size_t i = 0; i < s.q(); ++i) {
    rows.push_back(run_stack<T>(embed_inputs(embedded, s, i, cfg.mp_enabled), params.layers, opts));
  }
  return rows;
}

#define PASNET_INSTANTIATE_ENCODER(T)                                                                          \
  template EncoderParams<T> add_encoder_params<T>(ParamStore<T>&, const HyperConfig&, std::size_t, std::size_t); \
  template Tensor<T> predicate_flags<T>(const Sentence&, std::size_t, bool);                                   \
  template Var<T> embed_inputs<T>(Var<T>, const Sentence&, std::size_t, bool);                                 \
  template Var<T> gru_step<T>(Var<T>, Var<T>, Var<T>, Var<T>);                                                 \
  template Var<T> gru_cell<T>(Var<T>, Var<T>, const GruLayer<T>&);                                             \
  template Var<T> gru_sequence<T>(Var<T>, const GruLayer<T>&, bool);                                           \
  template Var<T> run_stack<T>(Var<T>, std::span<const GruLayer<T>>, const RunOptions&, std::vector<Var<T>>*); \
  template std::vector<Var<T>> encode_sentence<T>(Tape<T>&, const Sentence&, std::span<const std::int32_t>,   \
                                                  const EncoderParams<T>&, const HyperConfig&, const RunOptions&);

PASNET_INSTANTIATE_ENCODER(float)
PASNET_INSTANTIATE_ENCODER(double)

}  // namespace pasnet
