#pragma once

#include <array>
#include <span>
#include <vector>

#include "pasnet/corpus.hpp"
#include "pasnet/interaction.hpp"

namespace pasnet {

// p(c | i, t) for every predicate i and token t, stored [q][n][4].
struct LabelProbabilities {
  std::size_t q = 0;
  std::size_t n = 0;
  std::vector<double> p;

  LabelProbabilities() = default;
  LabelProbabilities(std::size_t q_, std::size_t n_) : q(q_), n(n_), p(q_ * n_ * kNumLabels, 0.0) {}

  double& at(std::size_t i, std::size_t t, Label c) { return p[(i * n + t) * kNumLabels + static_cast<std::size_t>(c)]; }
  double at(std::size_t i, std::size_t t, Label c) const {
    return p[(i * n + t) * kNumLabels + static_cast<std::size_t>(c)];
  }
  bool same_shape(const LabelProbabilities& o) const { return q == o.q && n == o.n; }
  bool operator==(const LabelProbabilities&) const = default;
};

struct ThresholdSet {
  std::array<double, 3> theta{0.5, 0.5, 0.5};  // NOM, ACC, DAT

  double operator[](Label c) const { return theta[static_cast<std::size_t>(c)]; }
  double& operator[](Label c) { return theta[static_cast<std::size_t>(c)]; }
  bool operator==(const ThresholdSet&) const = default;
};

inline constexpr int kAbsent = -1;

// Chosen token per (predicate, label) or kAbsent, with its probability.
struct ArgumentAssignment {
  struct Slot {
    int token = kAbsent;
    double prob = 0.0;  // max probability among candidates, even when absent
    bool operator==(const Slot&) const = default;
  };
  std::vector<std::array<Slot, 3>> slots;  // [predicate][label]

  const Slot& at(std::size_t i, Label c) const { return slots[i][static_cast<std::size_t>(c)]; }
  bool operator==(const ArgumentAssignment&) const = default;
};

// softmax(W_o h_{i,t} + b_o) for each row of the grid; element i is [n x 4].
template <typename T>
std::vector<Var<T>> output_layer(const HiddenGrid<T>& h, Var<T> w_o, Var<T> b_o);

template <typename T>
LabelProbabilities to_label_probabilities(const std::vector<Var<T>>& probs);

template <typename T>
LabelProbabilities label_probabilities(const HiddenGrid<T>& h, Var<T> w_o, Var<T> b_o) {
  return to_label_probabilities(output_layer(h, w_o, b_o));
}

// For each (i, c): the highest-probability token outside the predicate's
// bunsetsu (lowest index on ties), kept only if its probability is
// strictly greater than theta_c.
ArgumentAssignment decode(const LabelProbabilities& probs, const ThresholdSet& theta, const Sentence& s);

// Thresholds on the 0.01 grid maximizing overall F1. Labels are swept in
// the order NOM, ACC, DAT with the others held fixed, and the sweep is
// repeated until no threshold moves; ties go to the smaller threshold.
ThresholdSet search_thresholds(std::span<const Sentence> sentences, std::span<const LabelProbabilities> probs,
                               ThresholdSet start = {});

// Overall F1 of decoding the corpus with `theta` (same counting as
// search_thresholds and score()).
double corpus_f1(std::span<const Sentence> sentences, std::span<const LabelProbabilities> probs,
                 const ThresholdSet& theta);

// Cell-wise mean. Throws UsageError on an empty list or mismatched shapes.
LabelProbabilities ensemble_average(std::span<const LabelProbabilities> members);

}  // namespace pasnet
