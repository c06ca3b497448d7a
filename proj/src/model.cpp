#include "pasnet/model.hpp"

namespace pasnet {

std::vector<int> training_labels(const Sentence& s, int pred) {
  std::vector<int> labels(s.n(), index_of(Label::kNone));
  for (auto it = kArgLabels.rbegin(); it != kArgLabels.rend(); ++it) {
    const int t = canonical_target(s, pred, *it);
    if (t >= 0) labels[static_cast<std::size_t>(t)] = index_of(*it);
  }
  return labels;
}

template <typename T>
Model<T>::Model(const HyperConfig& cfg, std::size_t vocab_size, std::uint64_t init_seed)
    : cfg_(cfg), vocab_size_(vocab_size) {
  check(cfg_);
  if (vocab_size_ == 0) throw UsageError("model needs a nonempty vocabulary");
  if (cfg_.variant == Variant::kGrid) {
    encoder_ = add_grid_params(store_, cfg_, vocab_size_);
  } else {
    encoder_ = add_encoder_params(store_, cfg_, vocab_size_);
  }
  interaction_ = add_interaction_params(store_, cfg_);
  w_o_ = &store_.add("out.W", {static_cast<std::size_t>(kNumLabels), interaction_width(cfg_)});
  b_o_ = &store_.add("out.b", {static_cast<std::size_t>(kNumLabels)});

  Rng rng(init_seed);
  for (auto* p : store_.all()) {
    if (p == encoder_.embedding) {
      init_uniform(*p, kEmbeddingInitBound, rng);
    } else {
      init_glorot(*p, rng);
    }
  }
}

template <typename T>
std::vector<Var<T>> Model<T>::forward(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids,
                                      const RunOptions& opts, AttentionTrace* trace) {
  if (ids.size() != s.n()) throw DimensionError("forward: " + std::to_string(ids.size()) + " ids for " +
                                                std::to_string(s.n()) + " tokens in sentence " + s.id);
  HiddenGrid<T> h = cfg_.variant == Variant::kGrid ? grid_forward(tape, s, ids, encoder_, cfg_, opts)
                                                   : encode_sentence(tape, s, ids, encoder_, cfg_, opts);
  h = apply_interaction(cfg_, h, interaction_, trace);
  return output_layer(h, tape.parameter(*w_o_), tape.parameter(*b_o_));
}

template <typename T>
Var<T> Model<T>::loss(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids, const RunOptions& opts) {
  std::vector<Var<T>> probs = forward(tape, s, ids, opts);
  Var<T> total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const std::vector<int> gold = training_labels(s, static_cast<int>(i));
    Var<T> l = nll_rows(probs[i], std::span<const int>(gold));
    total = i == 0 ? l : add(total, l);
  }
  return total;
}

template <typename T>
LabelProbabilities Model<T>::predict(const Sentence& s, std::span<const std::int32_t> ids, AttentionTrace* trace) {
  if (s.q() == 0) return LabelProbabilities(0, s.n());
  Tape<T> tape(/*grad_enabled=*/false);
  return to_label_probabilities(forward(tape, s, ids, RunOptions{}, trace));
}

template <typename T>
std::vector<LabelProbabilities> predict_corpus(Model<T>& model, const Corpus& corpus) {
  std::vector<LabelProbabilities> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    const std::vector<std::int32_t> ids = corpus.vocab.encode(s);
    out.push_back(model.predict(s, ids));
  }
  return out;
}

template class Model<float>;
template class Model<double>;
template std::vector<LabelProbabilities> predict_corpus<float>(Model<float>&, const Corpus&);
template std::vector<LabelProbabilities> predict_corpus<double>(Model<double>&, const Corpus&);

}  // namespace pasnet
