#include "pasnet/decoder.hpp"

#include <algorithm>

#include "pasnet/errors.hpp"

namespace pasnet {

template <typename T>
std::vector<Var<T>> output_layer(const HiddenGrid<T>& h, Var<T> w_o, Var<T> b_o) {
  std::vector<Var<T>> out;
  out.reserve(h.size());
  for (const auto& row : h) out.push_back(softmax(affine(w_o, row, b_o)));
  return out;
}

template <typename T>
LabelProbabilities to_label_probabilities(const std::vector<Var<T>>& probs) {
  if (probs.empty()) return {};
  const std::size_t n = probs[0].value().dim(0);
  LabelProbabilities out(probs.size(), n);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Tensor<T>& v = probs[i].value();
    if (v.rank() != 2 || v.dim(0) != n || v.dim(1) != static_cast<std::size_t>(kNumLabels)) {
      throw DimensionError("label probabilities: expected [" + std::to_string(n) + " x 4], got " +
                           shape_string(v.shape()));
    }
    for (std::size_t k = 0; k < v.size(); ++k) out.p[i * n * kNumLabels + k] = static_cast<double>(v[k]);
  }
  return out;
}

namespace {

void check_shape(const LabelProbabilities& probs, const Sentence& s) {
  if (probs.q != s.q() || probs.n != s.n()) {
    throw DimensionError("probabilities [" + std::to_string(probs.q) + " x " + std::to_string(probs.n) +
                         "] do not match sentence " + s.id + " [" + std::to_string(s.q()) + " x " +
                         std::to_string(s.n()) + "]");
  }
}

// Best candidate of one slot and whether it lands in the gold cluster.
struct SlotSummary {
  double prob = -1.0;  // -1 when the predicate has no candidate token
  bool correct = false;
  bool has_gold = false;
};

bool in_cluster(const std::vector<int>* cluster, int t) {
  return cluster && std::binary_search(cluster->begin(), cluster->end(), t);
}

bool scorable(const Sentence& s, int pred, Label c) { return canonical_target(s, pred, c) >= 0; }

// Per label: slot summaries over the whole corpus.
std::array<std::vector<SlotSummary>, 3> summarize(std::span<const Sentence> sentences,
                                                  std::span<const LabelProbabilities> probs) {
  if (sentences.size() != probs.size()) throw UsageError("threshold search: sentence/probability count mismatch");
  std::array<std::vector<SlotSummary>, 3> out;
  ThresholdSet none;
  none.theta = {-1.0, -1.0, -1.0};
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const Sentence& s = sentences[k];
    ArgumentAssignment a = decode(probs[k], none, s);
    for (std::size_t i = 0; i < s.q(); ++i) {
      for (Label c : kArgLabels) {
        const auto& slot = a.at(i, c);
        SlotSummary sum;
        const int pred = static_cast<int>(i);
        sum.has_gold = scorable(s, pred, c);
        if (slot.token != kAbsent) {
          sum.prob = slot.prob;
          sum.correct = in_cluster(s.gold_cluster(pred, c), slot.token);
        }
        out[static_cast<std::size_t>(c)].push_back(sum);
      }
    }
  }
  return out;
}

struct Tally {
  long tp = 0, predicted = 0, gold = 0;
};

Tally tally(const std::vector<SlotSummary>& slots, double theta) {
  Tally t;
  for (const auto& s : slots) {
    if (s.has_gold) ++t.gold;
    if (s.prob > theta) {
      ++t.predicted;
      if (s.correct) ++t.tp;
    }
  }
  return t;
}

// F1 = 2 tp / (predicted + gold); compared exactly by cross-multiplying.
bool better(long tp_a, long den_a, long tp_b, long den_b) {
  if (den_a == 0) return false;
  if (den_b == 0) return tp_a > 0;
  return tp_a * den_b > tp_b * den_a;
}

}  // namespace

ArgumentAssignment decode(const LabelProbabilities& probs, const ThresholdSet& theta, const Sentence& s) {
  check_shape(probs, s);
  ArgumentAssignment out;
  out.slots.resize(s.q());
  for (std::size_t i = 0; i < s.q(); ++i) {
    const int pb = s.bunsetsu_of[static_cast<std::size_t>(s.predicates[i])];
    for (Label c : kArgLabels) {
      int best = kAbsent;
      double best_p = 0.0;
      for (std::size_t t = 0; t < s.n(); ++t) {
        if (s.bunsetsu_of[t] == pb) continue;
        const double p = probs.at(i, t, c);
        if (best == kAbsent || p > best_p) {
          best = static_cast<int>(t);
          best_p = p;
        }
      }
      auto& slot = out.slots[i][static_cast<std::size_t>(c)];
      slot.prob = best_p;
      slot.token = best != kAbsent && best_p > theta[c] ? best : kAbsent;
    }
  }
  return out;
}

ThresholdSet search_thresholds(std::span<const Sentence> sentences, std::span<const LabelProbabilities> probs,
                               ThresholdSet start) {
  const auto slots = summarize(sentences, probs);
  std::array<Tally, 3> current;
  for (std::size_t c = 0; c < 3; ++c) current[c] = tally(slots[c], start.theta[c]);

  ThresholdSet theta = start;
  constexpr int kMaxPasses = 100;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (std::size_t c = 0; c < 3; ++c) {
      long other_tp = 0, other_den = 0;
      for (std::size_t o = 0; o < 3; ++o) {
        if (o == c) continue;
        other_tp += current[o].tp;
        other_den += current[o].predicted + current[o].gold;
      }
      int best_k = 0;
      Tally best_tally = tally(slots[c], 0.0);
      for (int k = 1; k <= 100; ++k) {
        Tally t = tally(slots[c], k / 100.0);
        if (better(other_tp + t.tp, other_den + t.predicted + t.gold, other_tp + best_tally.tp,
                   other_den + best_tally.predicted + best_tally.gold)) {
          best_k = k;
          best_tally = t;
        }
      }
      const double value = best_k / 100.0;
      if (value != theta.theta[c]) {
        theta.theta[c] = value;
        moved = true;
      }
      current[c] = best_tally;
    }
    if (!moved) break;
  }
  return theta;
}

double corpus_f1(std::span<const Sentence> sentences, std::span<const LabelProbabilities> probs,
                 const ThresholdSet& theta) {
  if (sentences.size() != probs.size()) throw UsageError("corpus_f1: sentence/probability count mismatch");
  long tp = 0, predicted = 0, gold = 0;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const Sentence& s = sentences[k];
    ArgumentAssignment a = decode(probs[k], theta, s);
    for (std::size_t i = 0; i < s.q(); ++i) {
      for (Label c : kArgLabels) {
        const int pred = static_cast<int>(i);
        if (scorable(s, pred, c)) ++gold;
        const int t = a.at(i, c).token;
        if (t == kAbsent) continue;
        ++predicted;
        if (in_cluster(s.gold_cluster(pred, c), t)) ++tp;
      }
    }
  }
  const long den = predicted + gold;
  return den == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(den);
}

LabelProbabilities ensemble_average(std::span<const LabelProbabilities> members) {
  if (members.empty()) throw UsageError("ensemble_average: no members");
  LabelProbabilities out = members[0];
  for (std::size_t m = 1; m < members.size(); ++m) {
    if (!members[m].same_shape(out)) {
      throw UsageError("ensemble_average: member " + std::to_string(m) + " has shape [" +
                       std::to_string(members[m].q) + " x " + std::to_string(members[m].n) + "], expected [" +
                       std::to_string(out.q) + " x " + std::to_string(out.n) + "]");
    }
    for (std::size_t k = 0; k < out.p.size(); ++k) out.p[k] += members[m].p[k];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& v : out.p) v *= inv;
  return out;
}

template std::vector<Var<float>> output_layer<float>(const HiddenGrid<float>&, Var<float>, Var<float>);
template std::vector<Var<double>> output_layer<double>(const HiddenGrid<double>&, Var<double>, Var<double>);
template LabelProbabilities to_label_probabilities<float>(const std::vector<Var<float>>&);
template LabelProbabilities to_label_probabilities<double>(const std::vector<Var<double>>&);

}  // namespace pasnet
