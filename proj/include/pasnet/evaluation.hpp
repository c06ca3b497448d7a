#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pasnet/corpus.hpp"
#include "pasnet/decoder.hpp"

namespace pasnet {

enum class Stratum { kAll, kDep, kZero, kDist2, kDist3, kDist4, kDist5Plus };
inline constexpr std::size_t kNumStrata = 7;
inline constexpr std::array<Stratum, kNumStrata> kStrata = {Stratum::kAll,   Stratum::kDep,   Stratum::kZero,
                                                            Stratum::kDist2, Stratum::kDist3, Stratum::kDist4,
                                                            Stratum::kDist5Plus};
std::string_view stratum_name(Stratum s);

// Distance bucket for a dependency distance >= 1.
Stratum distance_stratum(int distance);

struct Counts {
  std::size_t tp = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const { return predicted == 0 ? 0.0 : static_cast<double>(tp) / predicted; }
  double recall() const { return gold == 0 ? 0.0 : static_cast<double>(tp) / gold; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

// Counts per stratum and label; label index 3 aggregates all labels.
struct EvalReport {
  static constexpr std::size_t kAllLabels = 3;
  std::array<std::array<Counts, 4>, kNumStrata> cells{};

  const Counts& at(Stratum s, std::optional<Label> label = std::nullopt) const {
    return cells[static_cast<std::size_t>(s)][label ? static_cast<std::size_t>(*label) : kAllLabels];
  }
  Counts& at(Stratum s, std::optional<Label> label = std::nullopt) {
    return cells[static_cast<std::size_t>(s)][label ? static_cast<std::size_t>(*label) : kAllLabels];
  }
  double f1() const { return at(Stratum::kAll).f1(); }
  bool operator==(const EvalReport&) const = default;
};

// Stratum of a gold slot: distance from the predicate to the nearest cluster
// member outside its bunsetsu. nullopt for slots that are not scored.
std::optional<int> slot_distance(const Sentence& s, int pred, Label label);

// A prediction is correct iff it falls in the slot's gold cluster. Gold
// slots fall in the stratum of slot_distance; a prediction falls in its
// gold slot's stratum when correct, otherwise in the stratum of its own
// distance to the predicate.
EvalReport score(std::span<const ArgumentAssignment> assignments, std::span<const Sentence> gold);

// Decodes every sentence with `theta` and scores the result.
EvalReport evaluate(std::span<const Sentence> sentences, std::span<const LabelProbabilities> probs,
                    const ThresholdSet& theta);

// Aligned plain-text table: one row per stratum with F1/P/R and counts,
// then per-label F1 by stratum.
void write_report_text(std::ostream& out, const EvalReport& report);
// JSON mirroring the table rows.
std::string report_json(const EvalReport& report);

// `<sent_id> <pred_id> <label> <tok_idx|-> <prob>`; ids are 1-based.
void write_predictions(std::ostream& out, const Sentence& s, const ArgumentAssignment& a);

struct SignificanceResult {
  std::vector<double> a;
  std::vector<double> b;
  double observed = 0.0;  // mean(a) - mean(b)
  double p_value = 1.0;
  bool exact = true;
  std::size_t draws = 0;  // Monte Carlo draws, 0 when exact
  std::uint64_t seed = 0;
};

// One-sided unpaired permutation test of mean(a) > mean(b). The observed
// split is counted among the reassignments. Enumerates all splits when
// there are at most `exact_limit` of them, otherwise draws `mc_draws`
// random splits and reports (hits + 1) / (draws + 1).
SignificanceResult permutation_test(std::span<const double> a, std::span<const double> b, std::uint64_t seed = 1,
                                    std::size_t exact_limit = 200000, std::size_t mc_draws = 100000);

// C(n, k), saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace pasnet
