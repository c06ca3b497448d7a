#include "pasnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pasnet/errors.hpp"
#include "pasnet/rng.hpp"

namespace pasnet {

std::string_view stratum_name(Stratum s) {
  switch (s) {
    case Stratum::kAll: return "ALL";
    case Stratum::kDep: return "Dep";
    case Stratum::kZero: return "Zero";
    case Stratum::kDist2: return "2";
    case Stratum::kDist3: return "3";
    case Stratum::kDist4: return "4";
    case Stratum::kDist5Plus: return ">=5";
  }
  return "?";
}

Stratum distance_stratum(int distance) {
  if (distance < 1) throw UsageError("distance_stratum: distance " + std::to_string(distance) + " has no stratum");
  switch (distance) {
    case 1: return Stratum::kDep;
    case 2: return Stratum::kDist2;
    case 3: return Stratum::kDist3;
    case 4: return Stratum::kDist4;
    default: return Stratum::kDist5Plus;
  }
}

std::optional<int> slot_distance(const Sentence& s, int pred, Label label) {
  const std::vector<int>* members = s.gold_cluster(pred, label);
  if (!members) return std::nullopt;
  std::optional<int> best;
  for (int t : *members) {
    const int d = dependency_distance(s, pred, t);
    if (d == kSameBunsetsu) continue;
    if (!best || d < *best) best = d;
  }
  return best;
}

namespace {

// Adds one instance to its bucket, the Zero aggregate when it is a zero
// case, and the ALL row, both per label and across labels.
void bump(EvalReport& r, Stratum bucket, Label label, Counts delta) {
  std::vector<Stratum> rows{Stratum::kAll, bucket};
  if (bucket != Stratum::kDep) rows.push_back(Stratum::kZero);
  for (Stratum s : rows) {
    r.at(s, label) += delta;
    r.at(s) += delta;
  }
}

}  // namespace

EvalReport score(std::span<const ArgumentAssignment> assignments, std::span<const Sentence> gold) {
  if (assignments.size() != gold.size()) {
    throw UsageError("score: " + std::to_string(assignments.size()) + " assignments for " +
                     std::to_string(gold.size()) + " sentences");
  }
  EvalReport r;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const Sentence& s = gold[k];
    const ArgumentAssignment& a = assignments[k];
    if (a.slots.size() != s.q()) {
      throw UsageError("score: assignment for sentence " + s.id + " covers " + std::to_string(a.slots.size()) +
                       " predicates, expected " + std::to_string(s.q()));
    }
    for (std::size_t i = 0; i < s.q(); ++i) {
      const int pred = static_cast<int>(i);
      for (Label c : kArgLabels) {
        const std::optional<int> gd = slot_distance(s, pred, c);
        if (gd) bump(r, distance_stratum(*gd), c, Counts{0, 0, 1});
        const int t = a.at(i, c).token;
        if (t == kAbsent) continue;
        if (t < 0 || static_cast<std::size_t>(t) >= s.n()) {
          throw UsageError("score: token " + std::to_string(t) + " out of range in sentence " + s.id);
        }
        const std::vector<int>* cluster = s.gold_cluster(pred, c);
        const bool correct = gd && cluster && std::binary_search(cluster->begin(), cluster->end(), t);
        const int pd = dependency_distance(s, pred, t);
        if (!correct && pd == kSameBunsetsu) {
          throw UsageError("score: prediction inside the predicate's bunsetsu in sentence " + s.id);
        }
        bump(r, distance_stratum(correct ? *gd : pd), c, Counts{correct ? 1u : 0u, 1, 0});
      }
    }
  }
  return r;
}

EvalReport evaluate(std::span<const Sentence> sentences, std::span<const LabelProbabilities> probs,
                    const ThresholdSet& theta) {
  if (sentences.size() != probs.size()) throw UsageError("evaluate: sentence/probability count mismatch");
  std::vector<ArgumentAssignment> assignments;
  assignments.reserve(sentences.size());
  for (std::size_t k = 0; k < sentences.size(); ++k) assignments.push_back(decode(probs[k], theta, sentences[k]));
  return score(assignments, sentences);
}

void write_report_text(std::ostream& out, const EvalReport& report) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << std::left << std::setw(8) << "stratum" << std::right << std::setw(8) << "F1" << std::setw(8) << "P"
    << std::setw(8) << "R" << std::setw(8) << "tp" << std::setw(8) << "pred" << std::setw(8) << "gold" << '\n';
  for (Stratum s : kStrata) {
    const Counts& c = report.at(s);
    o << std::left << std::setw(8) << stratum_name(s) << std::right << std::setw(8) << 100.0 * c.f1()
      << std::setw(8) << 100.0 * c.precision() << std::setw(8) << 100.0 * c.recall() << std::setw(8) << c.tp
      << std::setw(8) << c.predicted << std::setw(8) << c.gold << '\n';
  }
  o << '\n' << std::left << std::setw(8) << "label";
  for (Stratum s : kStrata) o << std::right << std::setw(8) << stratum_name(s);
  o << '\n';
  for (Label l : kArgLabels) {
    o << std::left << std::setw(8) << label_name(l);
    for (Stratum s : kStrata) o << std::right << std::setw(8) << 100.0 * report.at(s, l).f1();
    o << '\n';
  }
  out << o.str();
}

std::string report_json(const EvalReport& report) {
  auto cell = [](const Counts& c) {
    return nlohmann::ordered_json{{"f1", c.f1()},       {"precision", c.precision()}, {"recall", c.recall()},
                                  {"tp", c.tp},         {"predicted", c.predicted},   {"gold", c.gold}};
  };
  nlohmann::ordered_json j;
  j["f1"] = report.f1();
  nlohmann::ordered_json strata = nlohmann::ordered_json::array();
  for (Stratum s : kStrata) {
    nlohmann::ordered_json row = cell(report.at(s));
    row["stratum"] = stratum_name(s);
    nlohmann::ordered_json labels;
    for (Label l : kArgLabels) labels[std::string(label_name(l))] = cell(report.at(s, l));
    row["labels"] = std::move(labels);
    strata.push_back(std::move(row));
  }
  j["strata"] = std::move(strata);
  return j.dump(2) + "\n";
}

void write_predictions(std::ostream& out, const Sentence& s, const ArgumentAssignment& a) {
  std::ostringstream o;
  o << std::setprecision(6);
  for (std::size_t i = 0; i < a.slots.size(); ++i) {
    for (Label c : kArgLabels) {
      const auto& slot = a.at(i, c);
      o << s.id << ' ' << i + 1 << ' ' << label_name(c) << ' ';
      if (slot.token == kAbsent) {
        o << '-';
      } else {
        o << slot.token + 1;
      }
      o << ' ' << slot.prob << '\n';
    }
  }
  out << o.str();
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step.
    const std::size_t num = n - k + i;
    const std::size_t g = std::gcd(r, i);
    const std::size_t r2 = r / g, i2 = i / g;
    const std::size_t num2 = num / i2;
    if (r2 > std::numeric_limits<std::size_t>::max() / num2) return std::numeric_limits<std::size_t>::max();
    r = r2 * num2;
  }
  return r;
}

namespace {

double mean_difference(std::span<const double> pooled, const std::vector<bool>& in_a, std::size_t na) {
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = 0; k < pooled.size(); ++k) (in_a[k] ? sa : sb) += pooled[k];
  return sa / static_cast<double>(na) - sb / static_cast<double>(pooled.size() - na);
}

}  // namespace

SignificanceResult permutation_test(std::span<const double> a, std::span<const double> b, std::uint64_t seed,
                                    std::size_t exact_limit, std::size_t mc_draws) {
  if (a.empty() || b.empty()) throw UsageError("permutation_test: both samples must be nonempty");
  SignificanceResult r;
  r.a.assign(a.begin(), a.end());
  r.b.assign(b.begin(), b.end());
  std::vector<double> pooled(r.a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t na = a.size(), n = pooled.size();

  std::vector<bool> in_a(n, false);
  std::fill(in_a.begin(), in_a.begin() + static_cast<std::ptrdiff_t>(na), true);
  r.observed = mean_difference(pooled, in_a, na);
  // Reassignments equal to the observed value up to rounding count as hits.
  const double cut = r.observed - 1e-12 * std::max(1.0, std::abs(r.observed));

  const std::size_t total = binomial(n, na);
  if (total <= exact_limit) {
    r.exact = true;
    std::size_t hits = 0;
    std::vector<std::size_t> idx(na);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::fill(in_a.begin(), in_a.end(), false);
      for (std::size_t k : idx) in_a[k] = true;
      if (mean_difference(pooled, in_a, na) >= cut) ++hits;
      // Next combination in lexicographic order.
      std::size_t k = na;
      while (k > 0 && idx[k - 1] == n - na + (k - 1)) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t m = k; m < na; ++m) idx[m] = idx[m - 1] + 1;
    }
    r.p_value = static_cast<double>(hits) / static_cast<double>(total);
  } else {
    r.exact = false;
    r.draws = mc_draws;
    r.seed = seed;
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::size_t hits = 0;
    for (std::size_t d = 0; d < mc_draws; ++d) {
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      std::fill(in_a.begin(), in_a.end(), false);
      for (std::size_t k = 0; k < na; ++k) in_a[order[k]] = true;
      if (mean_difference(pooled, in_a, na) >= cut) ++hits;
    }
    r.p_value = static_cast<double>(hits + 1) / static_cast<double>(mc_draws + 1);
  }
  return r;
}

}  // namespace pasnet
