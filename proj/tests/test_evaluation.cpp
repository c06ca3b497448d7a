#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "decode_oracle.hpp"
#include "pasnet/errors.hpp"
#include "pasnet/evaluation.hpp"
#include "test_util.hpp"

using namespace pasnet;

namespace {

// Predicate v in bunsetsu 3; a, b, c depend on it directly and d hangs off a.
Sentence hand_sentence(const std::string& id) {
  Sentence s;
  s.id = id;
  s.tokens = {"a", "b", "c", "v", "d"};
  s.bunsetsu_of = {0, 1, 2, 3, 4};
  s.bunsetsu_head = {3, 3, 3, -1, 0};
  s.predicates = {3};
  return s;
}

ArgumentAssignment assign(std::size_t q, std::vector<std::tuple<std::size_t, Label, int>> picks) {
  ArgumentAssignment a;
  a.slots.resize(q);
  for (auto [i, c, t] : picks) a.slots[i][static_cast<std::size_t>(c)] = {t, 0.9};
  return a;
}

// Independent scorer: nearest-member distance by BFS, then per-bucket counts.
EvalReport oracle_score(const std::vector<ArgumentAssignment>& as, const std::vector<Sentence>& ss) {
  EvalReport r;
  auto bucket = [](int d) {
    return d == 1 ? Stratum::kDep : d == 2 ? Stratum::kDist2 : d == 3 ? Stratum::kDist3 : d == 4 ? Stratum::kDist4 : Stratum::kDist5Plus;
  };
  auto add = [&](Stratum b, Label c, std::size_t tp, std::size_t pred, std::size_t gold) {
    for (Stratum s : {Stratum::kAll, b}) {
      r.at(s, c).tp += tp, r.at(s, c).predicted += pred, r.at(s, c).gold += gold;
      r.at(s).tp += tp, r.at(s).predicted += pred, r.at(s).gold += gold;
    }
    if (b != Stratum::kDep) {
      r.at(Stratum::kZero, c).tp += tp, r.at(Stratum::kZero, c).predicted += pred, r.at(Stratum::kZero, c).gold += gold;
      r.at(Stratum::kZero).tp += tp, r.at(Stratum::kZero).predicted += pred, r.at(Stratum::kZero).gold += gold;
    }
  };
  for (std::size_t k = 0; k < ss.size(); ++k) {
    const Sentence& s = ss[k];
    for (std::size_t i = 0; i < s.q(); ++i) {
      const int pb = s.bunsetsu_of[static_cast<std::size_t>(s.predicates[i])];
      for (Label c : kArgLabels) {
        int gold_d = -1;
        if (const auto* cl = s.gold_cluster(static_cast<int>(i), c)) {
          for (int t : *cl) {
            const int d = testutil::bfs_distance(s, pb, s.bunsetsu_of[static_cast<std::size_t>(t)]);
            if (d > 0 && (gold_d < 0 || d < gold_d)) gold_d = d;
          }
        }
        if (gold_d > 0) add(bucket(gold_d), c, 0, 0, 1);
        const int t = as[k].at(i, c).token;
        if (t < 0) continue;
        const bool ok = gold_d > 0 && oracle::in_gold(s, static_cast<int>(i), c, t);
        add(bucket(ok ? gold_d : testutil::bfs_distance(s, pb, s.bunsetsu_of[static_cast<std::size_t>(t)])), c, ok, 1, 0);
      }
    }
  }
  return r;
}

double exact_p_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size(), na = a.size();
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double observed = mean(a) - mean(b);
  std::size_t hits = 0, total = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != na) continue;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < n; ++k) ((mask >> k) & 1 ? x : y).push_back(pooled[k]);
    ++total;
    hits += mean(x) - mean(y) >= observed - 1e-12;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("distance strata") {
  CHECK(distance_stratum(1) == Stratum::kDep);
  CHECK(distance_stratum(2) == Stratum::kDist2);
  CHECK(distance_stratum(4) == Stratum::kDist4);
  CHECK(distance_stratum(5) == Stratum::kDist5Plus);
  CHECK(distance_stratum(17) == Stratum::kDist5Plus);
  CHECK_THROWS_AS(distance_stratum(0), UsageError);
  CHECK(stratum_name(Stratum::kDist5Plus) == ">=5");

  Sentence s = hand_sentence("s");
  s.clusters[1] = {0, 4};
  s.clusters[2] = {4};
  s.clusters[3] = {3};
  s.gold_args[{0, Label::kNom}] = 1;
  s.gold_args[{0, Label::kAcc}] = 2;
  s.gold_args[{0, Label::kDat}] = 3;
  CHECK(slot_distance(s, 0, Label::kNom) == 1);
  CHECK(slot_distance(s, 0, Label::kAcc) == 2);
  CHECK(!slot_distance(s, 0, Label::kDat).has_value());
}

TEST_CASE("hand-built corpus: P = 0.5, R = 1/3, F1 = 0.4") {
  Sentence s1 = hand_sentence("s1");
  s1.clusters[1] = {0};
  s1.clusters[2] = {1};
  s1.gold_args[{0, Label::kNom}] = 1;
  s1.gold_args[{0, Label::kAcc}] = 2;
  Sentence s2 = hand_sentence("s2");
  s2.clusters[1] = {4};
  s2.gold_args[{0, Label::kNom}] = 1;
  std::vector<Sentence> gold{s1, s2};
  // Correct NOM in s1; s2's NOM guess lands on token 2 instead of 4.
  std::vector<ArgumentAssignment> pred{assign(1, {{0, Label::kNom, 0}}), assign(1, {{0, Label::kNom, 2}})};
  EvalReport r = score(pred, gold);
  CHECK(r.at(Stratum::kAll).precision() == 0.5);
  CHECK(r.at(Stratum::kAll).recall() == doctest::Approx(1.0 / 3.0));
  CHECK(r.f1() == doctest::Approx(0.4));
  CHECK(r.at(Stratum::kDep).gold == 2);
  CHECK(r.at(Stratum::kZero).gold == 1);
  CHECK(r.at(Stratum::kDist2).gold == 1);
  // The wrong guess is at distance 1 from the predicate.
  CHECK(r.at(Stratum::kDep).predicted == 2);
  CHECK(r.at(Stratum::kZero).f1() == 0.0);
  CHECK(r.at(Stratum::kAll, Label::kNom).tp == 1);
  CHECK(r.at(Stratum::kAll, Label::kAcc).gold == 1);
  CHECK(r == oracle_score(pred, gold));

  // Perfect and empty predictions.
  std::vector<ArgumentAssignment> perfect{assign(1, {{0, Label::kNom, 0}, {0, Label::kAcc, 1}}),
                                          assign(1, {{0, Label::kNom, 4}})};
  EvalReport p = score(perfect, gold);
  for (Stratum st : kStrata)
    if (p.at(st).gold > 0) CHECK(p.at(st).f1() == 1.0);
  std::vector<ArgumentAssignment> none{assign(1, {}), assign(1, {})};
  EvalReport e = score(none, gold);
  CHECK(e.at(Stratum::kAll).precision() == 0.0);
  CHECK(e.at(Stratum::kAll).recall() == 0.0);
  CHECK(e.f1() == 0.0);

  std::vector<ArgumentAssignment> short_list{assign(1, {})};
  CHECK_THROWS_AS(score(short_list, gold), UsageError);
}

TEST_CASE("scores agree with an independent oracle and keep their invariants") {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Sentence> ss;
    std::vector<ArgumentAssignment> as;
    for (int k = 0; k < 4; ++k) {
      ss.push_back(testutil::random_sentence(rng, 2 + static_cast<std::size_t>(rng.range(0, 12)), 1 + static_cast<std::size_t>(rng.range(0, 2))));
      LabelProbabilities p = oracle::random_probabilities(rng, ss.back().q(), ss.back().n(), false);
      as.push_back(decode(p, ThresholdSet{{rng.uniform(0, 0.6), rng.uniform(0, 0.6), rng.uniform(0, 0.6)}}, ss.back()));
    }
    EvalReport r = score(as, ss);
    REQUIRE(r == oracle_score(as, ss));
    for (Stratum st : kStrata) {
      const Counts& c = r.at(st);
      const double p = c.precision(), rc = c.recall();
      CHECK(std::abs(c.f1() - (p + rc == 0 ? 0.0 : 2 * p * rc / (p + rc))) < 1e-12);
      Counts sum;
      for (Label l : kArgLabels) sum += r.at(st, l);
      CHECK(sum == c);
    }
    Counts buckets;
    for (Stratum st : {Stratum::kDist2, Stratum::kDist3, Stratum::kDist4, Stratum::kDist5Plus}) buckets += r.at(st);
    CHECK(buckets == r.at(Stratum::kZero));
    buckets += r.at(Stratum::kDep);
    CHECK(buckets == r.at(Stratum::kAll));
  }
}

TEST_CASE("evaluate decodes then scores") {
  Rng rng(2);
  std::vector<Sentence> ss;
  std::vector<LabelProbabilities> ps;
  for (int k = 0; k < 5; ++k) {
    ss.push_back(testutil::random_sentence(rng, 6, 2));
    ps.push_back(oracle::random_probabilities(rng, 2, 6, true));
  }
  ThresholdSet theta{{0.3, 0.2, 0.4}};
  std::vector<ArgumentAssignment> as;
  for (int k = 0; k < 5; ++k) as.push_back(decode(ps[k], theta, ss[k]));
  CHECK(evaluate(ss, ps, theta) == score(as, ss));
  CHECK(evaluate(ss, ps, theta).f1() == doctest::Approx(corpus_f1(ss, ps, theta)).epsilon(1e-15));
}

TEST_CASE("report and prediction output") {
  Sentence s1 = hand_sentence("s1");
  s1.clusters[1] = {0};
  s1.gold_args[{0, Label::kNom}] = 1;
  std::vector<Sentence> gold{s1};
  ArgumentAssignment a = assign(1, {{0, Label::kNom, 0}});
  a.slots[0][1].prob = 0.25;
  EvalReport r = score(std::vector<ArgumentAssignment>{a}, gold);

  std::ostringstream text;
  write_report_text(text, r);
  CHECK(text.str().find("ALL") != std::string::npos);
  CHECK(text.str().find("100.00") != std::string::npos);
  auto j = nlohmann::json::parse(report_json(r));
  CHECK(j["f1"].get<double>() == 1.0);
  CHECK(j["strata"].size() == kNumStrata);
  CHECK(j["strata"][1]["stratum"] == "Dep");
  CHECK(j["strata"][0]["labels"]["NOM"]["tp"] == 1);

  std::ostringstream out;
  write_predictions(out, s1, a);
  CHECK(out.str() == "s1 1 NOM 1 0.9\ns1 1 ACC - 0.25\ns1 1 DAT - 0\n");
}

TEST_CASE("permutation test") {
  std::vector<double> ones(10, 1.0), zeros(10, 0.0);
  SignificanceResult extreme = permutation_test(ones, zeros);
  CHECK(extreme.exact);
  CHECK(binomial(20, 10) == 184756);
  CHECK(extreme.p_value == doctest::Approx(1.0 / 184756.0).epsilon(1e-12));
  CHECK(extreme.p_value == doctest::Approx(5.4e-6).epsilon(0.01));
  CHECK(extreme.observed == 1.0);

  std::vector<double> same{0.81, 0.83, 0.8, 0.82};
  CHECK(permutation_test(same, same).p_value >= 0.5);

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(4), b(4);
    for (double& v : a) v = 0.8 + rng.uniform(0.0, 0.05);
    for (double& v : b) v = 0.79 + rng.uniform(0.0, 0.05);
    SignificanceResult ex = permutation_test(a, b);
    CHECK(ex.exact);
    CHECK(ex.p_value == doctest::Approx(exact_p_oracle(a, b)).epsilon(1e-12));
    SignificanceResult mc = permutation_test(a, b, 7 + static_cast<std::uint64_t>(trial), 0, 100000);
    CHECK(!mc.exact);
    CHECK(mc.draws == 100000);
    CHECK(std::abs(mc.p_value - ex.p_value) < 0.01);
    CHECK(ex.p_value + permutation_test(b, a).p_value >= 1.0);
    CHECK(ex.p_value >= 0.0);
    CHECK(ex.p_value <= 1.0);
  }
  // Monte Carlo is reproducible from its seed.
  std::vector<double> a{0.1, 0.5, 0.3}, b{0.2, 0.4, 0.6};
  CHECK(permutation_test(a, b, 5, 0, 2000).p_value == permutation_test(a, b, 5, 0, 2000).p_value);
  CHECK_THROWS_AS(permutation_test(std::vector<double>{}, b), UsageError);
  CHECK(binomial(5, 7) == 0);
  CHECK(binomial(200, 100) == std::numeric_limits<std::size_t>::max());
}
