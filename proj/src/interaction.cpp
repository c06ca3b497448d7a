#include "pasnet/interaction.hpp"

namespace pasnet {

std::size_t interaction_width(const HyperConfig& cfg) {
  switch (cfg.variant) {
    case Variant::kBase:
    case Variant::kGrid: return cfg.d_r;
    default: return cfg.d_f;
  }
}

template <typename T>
InteractionParams<T> add_interaction_params(ParamStore<T>& store, const HyperConfig& cfg) {
  InteractionParams<T> p;
  const std::size_t dr = cfg.d_r, df = cfg.d_f;
  const bool pool = cfg.variant == Variant::kPool || cfg.variant == Variant::kAttPool ||
                    cfg.variant == Variant::kPoolSelfAtt;
  if (pool) {
    p.w_f = &store.add("int.W_f", {df, 2 * dr});
    p.b_f = &store.add("int.b_f", {df});
  }
  if (cfg.has_attention()) {
    // Pool-SelfAtt attends over the pooled d_f-wide sequence.
    const std::size_t att_in = cfg.variant == Variant::kPoolSelfAtt ? df : dr;
    p.w_g = &store.add("int.W_g", {df, 2 * att_in});
    p.b_g = &store.add("int.b_g", {df});
    p.w_a = &store.add("int.W_a", {1, df});
    p.b_a = &store.add("int.b_a", {1});
    if (cfg.variant != Variant::kAttPool) {
      p.w_h = &store.add("int.W_h", {df, 2 * att_in});
      p.b_h = &store.add("int.b_h", {df});
    }
  }
  return p;
}

namespace {

template <typename T>
void require_params(bool ok, const char* layer) {
  if (!ok) throw UsageError(std::string(layer) + ": missing interaction parameters for this variant");
}

template <typename T>
void record_attention(AttentionTrace* trace, Var<T> weights, int target, int source) {
  if (!trace) return;
  const Tensor<T>& a = weights.value();
  trace->distributions += a.rows();
  if (!trace->retain) return;
  AttentionMatrix m;
  m.target = target;
  m.source = source;
  m.n = a.rows();
  m.weights.assign(a.data().begin(), a.data().end());
  trace->matrices.push_back(std::move(m));
}

// W [m x (a + b)] applied to [x, y] as W_left x + W_right y + bias.
template <typename T>
struct SplitAffine {
  Var<T> left, right, bias;
  SplitAffine(Tape<T>& tape, Parameter<T>& w, Parameter<T>& b, std::size_t left_cols) {
    Var<T> wv = tape.parameter(w);
    left = slice(wv, 0, left_cols);
    right = slice(wv, left_cols, w.value.dim(1) - left_cols);
    bias = tape.parameter(b);
  }
  Var<T> apply_left(Var<T> x) const { return affine(left, x, bias); }
  Var<T> apply_right(Var<T> y) const { return linear(right, y); }
};

// Weighted sum over x's rows, with weights from
// softmax_t'(W_a tanh(W_g[q_t, x_t'] + b_g) + b_a), one distribution per row
// of `query_left` (already the W_g-left projection of the queries).
template <typename T>
Var<T> attend(Var<T> query_left, Var<T> x, const SplitAffine<T>& g, Var<T> w_a, Var<T> b_a, AttentionTrace* trace,
              int target, int source) {
  const std::size_t nq = query_left.value().dim(0);
  const std::size_t nx = x.value().dim(0);
  Var<T> feat = tanh(pairwise_sum(query_left, g.apply_right(x)));  // [nq x nx x d_f]
  Var<T> scores = reshape(affine(w_a, feat, b_a), {nq, nx});
  Var<T> weights = softmax(scores);
  record_attention(trace, weights, target, source);
  return matmul(weights, x);
}

template <typename T>
Var<T> self_attention(Var<T> x, const InteractionParams<T>& p, AttentionTrace* trace, int target) {
  Tape<T>& tape = *x.tape;
  const std::size_t d_in = x.value().dim(1);
  SplitAffine<T> g(tape, *p.w_g, *p.b_g, d_in);
  SplitAffine<T> h(tape, *p.w_h, *p.b_h, d_in);
  Var<T> summary = attend(g.apply_left(x), x, g, tape.parameter(*p.w_a), tape.parameter(*p.b_a), trace, target, -1);
  return relu(add(h.apply_left(x), h.apply_right(summary)));
}

}  // namespace

template <typename T>
HiddenGrid<T> pool_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p) {
  require_params<T>(p.w_f && p.b_f, "pool_layer");
  if (h.empty()) throw UsageError("pool_layer: no predicates");
  Tape<T>& tape = *h[0].tape;
  const std::size_t d = h[0].value().dim(1);
  SplitAffine<T> f(tape, *p.w_f, *p.b_f, d);
  std::vector<Var<T>> left, right;
  for (const auto& row : h) {
    left.push_back(f.apply_left(row));
    right.push_back(f.apply_right(row));
  }
  HiddenGrid<T> out;
  std::vector<Var<T>> pairs(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = 0; j < h.size(); ++j) pairs[j] = relu(add(left[i], right[j]));
    out.push_back(maxpool_set<T>(pairs));
  }
  return out;
}

template <typename T>
HiddenGrid<T> att_pool_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p, AttentionTrace* trace) {
  require_params<T>(p.w_f && p.w_g && p.w_a, "att_pool_layer");
  if (h.empty()) throw UsageError("att_pool_layer: no predicates");
  Tape<T>& tape = *h[0].tape;
  const std::size_t d = h[0].value().dim(1);
  SplitAffine<T> f(tape, *p.w_f, *p.b_f, d);
  SplitAffine<T> g(tape, *p.w_g, *p.b_g, d);
  Var<T> w_a = tape.parameter(*p.w_a);
  Var<T> b_a = tape.parameter(*p.b_a);
  HiddenGrid<T> out;
  std::vector<Var<T>> pairs(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    Var<T> query = g.apply_left(h[i]);
    Var<T> own = f.apply_left(h[i]);
    for (std::size_t j = 0; j < h.size(); ++j) {
      Var<T> summary = attend(query, h[j], g, w_a, b_a, trace, static_cast<int>(i), static_cast<int>(j));
      pairs[j] = relu(add(own, f.apply_right(summary)));
    }
    out.push_back(maxpool_set<T>(pairs));
  }
  return out;
}

template <typename T>
HiddenGrid<T> pool_selfatt_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p, AttentionTrace* trace) {
  require_params<T>(p.w_f && p.w_g && p.w_a && p.w_h, "pool_selfatt_layer");
  HiddenGrid<T> pooled = pool_layer(h, p);
  HiddenGrid<T> out;
  for (std::size_t i = 0; i < pooled.size(); ++i) out.push_back(self_attention(pooled[i], p, trace, static_cast<int>(i)));
  return out;
}

template <typename T>
HiddenGrid<T> selfatt_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p, AttentionTrace* trace) {
  require_params<T>(p.w_g && p.w_a && p.w_h, "selfatt_layer");
  HiddenGrid<T> out;
  for (std::size_t i = 0; i < h.size(); ++i) out.push_back(self_attention(h[i], p, trace, static_cast<int>(i)));
  return out;
}

template <typename T>
HiddenGrid<T> apply_interaction(const HyperConfig& cfg, const HiddenGrid<T>& h, const InteractionParams<T>& p,
                                AttentionTrace* trace) {
  switch (cfg.variant) {
    case Variant::kPool: return pool_layer(h, p);
    case Variant::kAttPool: return att_pool_layer(h, p, trace);
    case Variant::kPoolSelfAtt: return pool_selfatt_layer(h, p, trace);
    case Variant::kSelfAtt: return selfatt_layer(h, p, trace);
    case Variant::kBase:
    case Variant::kGrid: break;
  }
  return base_passthrough(h);
}

#define PASNET_INSTANTIATE_INTERACTION(T)                                                                      \
  template InteractionParams<T> add_interaction_params<T>(ParamStore<T>&, const HyperConfig&);                 \
  template HiddenGrid<T> pool_layer<T>(const HiddenGrid<T>&, const InteractionParams<T>&);                      \
  template HiddenGrid<T> att_pool_layer<T>(const HiddenGrid<T>&, const InteractionParams<T>&, AttentionTrace*); \
  template HiddenGrid<T> pool_selfatt_layer<T>(const HiddenGrid<T>&, const InteractionParams<T>&,              \
                                               AttentionTrace*);                                               \
  template HiddenGrid<T> selfatt_layer<T>(const HiddenGrid<T>&, const InteractionParams<T>&, AttentionTrace*);  \
  template HiddenGrid<T> apply_interaction<T>(const HyperConfig&, const HiddenGrid<T>&,                        \
                                              const InteractionParams<T>&, AttentionTrace*);

PASNET_INSTANTIATE_INTERACTION(float)
PASNET_INSTANTIATE_INTERACTION(double)

}  // namespace pasnet
