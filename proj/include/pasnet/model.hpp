#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pasnet/decoder.hpp"
#include "pasnet/encoder.hpp"
#include "pasnet/grid.hpp"
#include "pasnet/interaction.hpp"

namespace pasnet {

// Embedding range for the uniform initialization of "embed".
inline constexpr double kEmbeddingInitBound = 0.1;

// Per-token training labels of predicate `pred`: the canonical target of
// each gold slot gets that slot's label, everything else NONE. When one
// token is the target of several slots the first label in NOM, ACC, DAT
// order wins.
std::vector<int> training_labels(const Sentence& s, int pred);

// Full network: encoder (or Grid), interaction layer, softmax output.
template <typename T>
class Model {
 public:
  Model(const HyperConfig& cfg, std::size_t vocab_size, std::uint64_t init_seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const HyperConfig& config() const { return cfg_; }
  std::size_t vocab_size() const { return vocab_size_; }
  ParamStore<T>& params() { return store_; }
  const ParamStore<T>& params() const { return store_; }

  // Element i holds p(c | i, t) as [n x 4].
  std::vector<Var<T>> forward(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids,
                              const RunOptions& opts, AttentionTrace* trace = nullptr);

  // Sum of the per-token negative log likelihoods over all predicates.
  Var<T> loss(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids, const RunOptions& opts);

  // Inference without recording gradients and without dropout.
  LabelProbabilities predict(const Sentence& s, std::span<const std::int32_t> ids, AttentionTrace* trace = nullptr);

 private:
  HyperConfig cfg_;
  std::size_t vocab_size_;
  ParamStore<T> store_;
  EncoderParams<T> encoder_;
  InteractionParams<T> interaction_;
  Parameter<T>* w_o_ = nullptr;
  Parameter<T>* b_o_ = nullptr;
};

// Probabilities for every sentence of a corpus, in order.
template <typename T>
std::vector<LabelProbabilities> predict_corpus(Model<T>& model, const Corpus& corpus);

}  // namespace pasnet
