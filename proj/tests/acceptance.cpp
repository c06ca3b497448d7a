// Acceptance suite. Prints one PASS/FAIL line per criterion on stdout;
// progress and per-run details go to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <unistd.h>

#include "decode_oracle.hpp"
#include "oracle.hpp"
#include "pasnet/artifacts.hpp"
#include "pasnet/checkpoint.hpp"
#include "pasnet/evaluation.hpp"
#include "pasnet/gradcheck.hpp"
#include "pasnet/ops.hpp"
#include "pasnet/synthetic.hpp"
#include "pasnet/trainer.hpp"
#include "test_util.hpp"

using namespace pasnet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using testutil::random_sentence;
using testutil::random_tensor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o << std::setprecision(precision) << v;
  return o.str();
}

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::vector<std::int32_t> ids_for(const Sentence& s, std::size_t vocab) {
  std::vector<std::int32_t> ids;
  for (std::size_t t = 0; t < s.n(); ++t) ids.push_back(static_cast<std::int32_t>((t * 3 + 1) % vocab));
  return ids;
}

void perturb(ParamStore<double>& store, Rng& rng, double scale) {
  for (auto* p : store.all())
    for (std::size_t k = 0; k < p->value.size(); ++k) p->value[k] += rng.uniform(-scale, scale);
}

// ------------------------------------------------------------------ 1

Outcome gradient_suite() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  std::string worst_name;
  std::size_t checks = 0;
  auto note = [&](const std::string& name, const GradCheckResult& r) {
    ++checks;
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = name + " " + r.worst;
    }
  };
  auto check_op = [&](const std::string& name, Shape shape, auto f) {
    for (int trial = 0; trial < 3; ++trial) note(name, finite_diff_check(f, random_tensor(shape, rng)));
  };
  const auto w = random_tensor({3, 4}, rng);
  const auto b = random_tensor({3}, rng);
  const auto m = random_tensor({4, 2}, rng);
  const auto other = random_tensor({2, 4}, rng);
  const auto weights = random_tensor({2, 4}, rng);
  const auto w22 = random_tensor({2, 2}, rng);
  const auto w34 = random_tensor({3, 4}, rng);
  const auto w42 = random_tensor({4, 2}, rng);
  auto weigh = [](Tape<double>& t, Var<double> y, const Tensor<double>& wt) { return sum(mul(y, t.constant(wt))); };

  check_op("affine.x", {2, 4}, [&](Tape<double>& t, Var<double> x) {
    return sum(tanh(affine(t.constant(w), x, t.constant(b))));
  });
  check_op("affine.w", {3, 4}, [&](Tape<double>& t, Var<double> x) {
    return sum(tanh(affine(x, t.constant(other), t.constant(b))));
  });
  check_op("affine.b", {3}, [&](Tape<double>& t, Var<double> x) {
    return sum(tanh(affine(t.constant(w), t.constant(other), x)));
  });
  check_op("matmul.l", {2, 4}, [&](Tape<double>& t, Var<double> x) { return sum(tanh(matmul(x, t.constant(m)))); });
  check_op("matmul.r", {4, 2}, [&](Tape<double>& t, Var<double> x) { return sum(tanh(matmul(t.constant(other), x))); });
  check_op("relu", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, relu(x), weights); });
  check_op("tanh", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, tanh(x), weights); });
  check_op("sigmoid", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, sigmoid(x), weights); });
  check_op("softmax", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, softmax(x), weights); });
  check_op("maxpool_set", {2, 4}, [&](Tape<double>& t, Var<double> x) {
    std::vector<Var<double>> set{x, t.constant(other), mul(x, x)};
    return weigh(t, maxpool_set<double>(set), weights);
  });
  check_op("add", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, add(x, t.constant(other)), weights); });
  check_op("sub", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, sub(t.constant(other), x), weights); });
  check_op("mul", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, mul(x, tanh(x)), weights); });
  check_op("concat", {2, 4}, [&](Tape<double>&, Var<double> x) {
    auto c = concat(x, tanh(x));
    return sum(mul(c, c));
  });
  check_op("slice", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, slice(x, 1, 2), w22); });
  check_op("row", {2, 4}, [&](Tape<double>&, Var<double> x) { return sum(tanh(row(x, 1))); });
  check_op("stack", {4}, [&](Tape<double>& t, Var<double> x) {
    std::vector<Var<double>> rows{x, tanh(x)};
    return weigh(t, stack<double>(rows), weights);
  });
  check_op("gather_rows", {5, 4}, [&](Tape<double>& t, Var<double> x) {
    const std::vector<std::int32_t> ids{3, 0, 3};
    return weigh(t, gather_rows<double>(x, ids), w34);
  });
  check_op("pairwise_sum", {3, 4}, [&](Tape<double>& t, Var<double> x) {
    auto p = pairwise_sum(x, t.constant(other));
    return sum(tanh(mul(p, p)));
  });
  check_op("reshape", {2, 4}, [&](Tape<double>& t, Var<double> x) { return weigh(t, reshape(tanh(x), {4, 2}), w42); });
  check_op("nll_rows", {3, 4}, [&](Tape<double>&, Var<double> x) {
    const std::vector<int> gold{0, 3, 1};
    return nll_rows(softmax(x), std::span<const int>(gold));
  });

  for (const auto& v : testutil::all_variants()) {
    for (std::uint64_t trial = 0; trial < 2; ++trial) {
      Model<double> model(testutil::small_config(v, 8, 3), 10, 40 + trial);
      Rng init(50 + trial);
      perturb(model.params(), init, 0.2);
      const std::size_t n = 2 + static_cast<std::size_t>(rng.range(0, 4));
      const std::size_t q = 1 + static_cast<std::size_t>(rng.range(0, 2));
      Sentence s = random_sentence(rng, n, std::min(q, n));
      const auto ids = ids_for(s, 10);
      auto loss = [&](Tape<double>& tape) { return model.loss(tape, s, ids, RunOptions{}); };
      auto params = model.params().all();
      note("model:" + v, finite_diff_check(loss, params));
    }
  }
  const double secs = elapsed(start);
  return {worst < 1e-4 && secs < 120.0, std::to_string(checks) + " checks, max rel error " + fmt(worst, 3) + " (" +
                                           worst_name + "), " + fmt(secs, 3) + " s"};
}

// ------------------------------------------------------------------ 2

Outcome attention_normalization() {
  const std::vector<std::string> variants{"att-pool", "pool-selfatt", "selfatt", "mp-att-pool", "mp-pool-selfatt",
                                          "mp-selfatt"};
  Rng rng(202);
  double worst = 0.0;
  std::size_t rows = 0;
  bool counts_ok = true;
  for (std::size_t pass = 0; pass < 1000; ++pass) {
    const std::string& v = variants[pass % variants.size()];
    Model<double> model(testutil::small_config(v, 6, 2), 12, 1000 + pass);
    perturb(model.params(), rng, 1.0);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.range(0, 9));
    const std::size_t q = 1 + static_cast<std::size_t>(rng.range(0, 3));
    Sentence s = random_sentence(rng, n, std::min(q, n));
    AttentionTrace trace;
    trace.retain = true;
    model.predict(s, ids_for(s, 12), &trace);
    std::size_t seen = 0;
    for (const auto& mtx : trace.matrices)
      for (std::size_t t = 0; t < mtx.n; ++t) {
        const double total = std::accumulate(mtx.weights.begin() + static_cast<std::ptrdiff_t>(t * mtx.n),
                                             mtx.weights.begin() + static_cast<std::ptrdiff_t>((t + 1) * mtx.n), 0.0);
        worst = std::max(worst, std::abs(total - 1.0));
        ++seen;
      }
    counts_ok = counts_ok && seen == trace.distributions && seen > 0;
    rows += seen;
  }
  return {worst <= 1e-6 && counts_ok,
          std::to_string(rows) + " distributions over 1000 passes, max |sum - 1| " + fmt(worst, 3)};
}

// ------------------------------------------------------------------ 3

std::vector<Tensor<double>> grid_values(const HiddenGrid<double>& g) {
  std::vector<Tensor<double>> v;
  for (const auto& r : g) v.push_back(r.value());
  return v;
}

Outcome permutation_invariance() {
  Rng rng(303);
  std::size_t pool_equal = 0, m_equal = 0, full_equal = 0, grid_unequal = 0;
  for (std::uint64_t c = 0; c < 100; ++c) {
    const std::size_t q = 2 + static_cast<std::size_t>(rng.range(0, 3));
    const std::size_t n = 1 + static_cast<std::size_t>(rng.range(0, 6));
    std::vector<std::size_t> perm(q);
    std::iota(perm.begin(), perm.end(), 0);
    while (true) {
      rng.shuffle(perm);
      if (!std::is_sorted(perm.begin(), perm.end())) break;
    }
    std::vector<Tensor<double>> g, shuffled;
    for (std::size_t i = 0; i < q; ++i) g.push_back(random_tensor({n, 6}, rng));
    for (auto k : perm) shuffled.push_back(g[k]);
    auto permuted_equal = [&](const std::vector<Tensor<double>>& a, const std::vector<Tensor<double>>& b) {
      for (std::size_t k = 0; k < perm.size(); ++k)
        if (!(b[k] == a[perm[k]])) return false;
      return true;
    };
    auto constants = [](Tape<double>& tape, const std::vector<Tensor<double>>& rows) {
      HiddenGrid<double> h;
      for (const auto& r : rows) h.push_back(tape.constant(r));
      return h;
    };
    for (const char* variant : {"pool", "pool-selfatt"}) {
      HyperConfig cfg = testutil::small_config(variant, 6);
      cfg.d_f = 7;
      ParamStore<double> store;
      InteractionParams<double> p = add_interaction_params(store, cfg);
      Rng init(c + 1);
      for (auto* param : store.all()) init_uniform(*param, 0.6, init);
      Tape<double> tape;
      if (std::string(variant) == "pool") {
        pool_equal += permuted_equal(grid_values(pool_layer(constants(tape, g), p)),
                                     grid_values(pool_layer(constants(tape, shuffled), p)));
      } else {
        // The m-stage is the pooling over the pair transform.
        m_equal += permuted_equal(grid_values(pool_layer(constants(tape, g), p)),
                                  grid_values(pool_layer(constants(tape, shuffled), p)));
        full_equal += permuted_equal(grid_values(pool_selfatt_layer(constants(tape, g), p)),
                                     grid_values(pool_selfatt_layer(constants(tape, shuffled), p)));
      }
    }

    HyperConfig gcfg = testutil::small_config("grid", 5, 3);
    ParamStore<double> gstore;
    EncoderParams<double> enc = add_grid_params(gstore, gcfg, 10);
    Rng ginit(500 + c);
    for (auto* param : gstore.all()) init_uniform(*param, 0.5, ginit);
    const std::size_t gn = q + 2 + static_cast<std::size_t>(rng.range(0, 3));
    Sentence s = random_sentence(rng, gn, q);
    Sentence t = s;
    for (std::size_t k = 0; k < q; ++k) t.predicates[k] = s.predicates[perm[k]];
    t.gold_args.clear();
    const auto ids = ids_for(s, 10);
    Tape<double> tape;
    const auto a = grid_values(grid_forward(tape, s, ids, enc, gcfg, RunOptions{}));
    const auto b = grid_values(grid_forward(tape, t, ids, enc, gcfg, RunOptions{}));
    grid_unequal += !permuted_equal(a, b);
  }
  return {pool_equal == 100 && m_equal == 100 && full_equal == 100 && grid_unequal >= 95,
          "POOL equal " + std::to_string(pool_equal) + "/100, POOL_SELFATT m-stage equal " + std::to_string(m_equal) +
              "/100 (output " + std::to_string(full_equal) + "/100), GRID unequal " + std::to_string(grid_unequal) +
              "/100"};
}

// ------------------------------------------------------------------ 4

Outcome attention_counts() {
  Rng rng(404);
  bool ok = true;
  std::ostringstream d;
  for (auto [n, q] : {std::pair<std::size_t, std::size_t>{5, 2}, {7, 3}}) {
    Sentence s = random_sentence(rng, n, q);
    for (const char* v : {"att-pool", "pool-selfatt", "selfatt"}) {
      Model<double> model(testutil::small_config(v, 6, 2), 12, 4);
      AttentionTrace trace;
      model.predict(s, ids_for(s, 12), &trace);
      const std::size_t expected = std::string(v) == "att-pool" ? n * q * q : n * q;
      ok = ok && trace.distributions == expected;
      d << v << "(" << n << "," << q << ")=" << trace.distributions << " ";
    }
  }
  std::string text = d.str();
  text.pop_back();
  return {ok, text};
}

// ------------------------------------------------------------------ 5

std::vector<std::array<int, 3>> tokens_of(const ArgumentAssignment& a) {
  std::vector<std::array<int, 3>> out;
  for (const auto& slot : a.slots) out.push_back({slot[0].token, slot[1].token, slot[2].token});
  return out;
}

Outcome decode_oracle_check() {
  Rng rng(505);
  std::size_t agree = 0, monotone = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.range(0, 8));
    Sentence s = random_sentence(rng, n, std::min<std::size_t>(n, 1 + static_cast<std::size_t>(rng.range(0, 2))));
    LabelProbabilities p = oracle::random_probabilities(rng, s.q(), s.n(), trial % 2 == 0);
    std::array<double, 3> theta{};
    for (double& v : theta) v = trial % 3 == 0 ? static_cast<double>(rng.range(0, 20)) * 0.05 : rng.uniform();
    agree += tokens_of(decode(p, ThresholdSet{theta}, s)) == oracle::decode(p, theta, s);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.range(0, 7));
    Sentence s = random_sentence(rng, n, std::min<std::size_t>(n, 1 + static_cast<std::size_t>(rng.range(0, 2))));
    LabelProbabilities p = oracle::random_probabilities(rng, s.q(), s.n(), trial % 2 == 1);
    ThresholdSet lo{{rng.uniform(), rng.uniform(), rng.uniform()}};
    ThresholdSet hi = lo;
    for (double& v : hi.theta) v += rng.uniform(0.0, 1.0 - v);
    const auto a = tokens_of(decode(p, lo, s)), b = tokens_of(decode(p, hi, s));
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t c = 0; c < 3; ++c) ok = ok && (b[i][c] == kAbsent || b[i][c] == a[i][c]);
    monotone += ok;
  }
  return {agree == 1000 && monotone == 1000,
          "oracle agreement " + std::to_string(agree) + "/1000, monotone " + std::to_string(monotone) + "/1000"};
}

// ------------------------------------------------------------------ 6

Outcome threshold_search_check() {
  Rng rng(606);
  std::size_t match = 0;
  double worst = 0.0;
  const std::size_t corpora = 30;
  for (std::size_t trial = 0; trial < corpora; ++trial) {
    const std::size_t count = 1 + trial % 5;
    std::vector<Sentence> sentences;
    std::vector<LabelProbabilities> probs;
    for (std::size_t k = 0; k < count; ++k) {
      sentences.push_back(random_sentence(rng, 2 + static_cast<std::size_t>(rng.range(0, 5)), 1));
      probs.push_back(oracle::random_probabilities(rng, 1, sentences.back().n(), trial % 2 == 0));
    }
    const double got = corpus_f1(sentences, probs, search_thresholds(sentences, probs));
    const double best = oracle::joint_best_f1(sentences, probs);
    worst = std::max(worst, std::abs(got - best));
    match += std::abs(got - best) <= 1e-12;
  }
  return {match == corpora, std::to_string(match) + "/" + std::to_string(corpora) +
                                " corpora match the joint-grid optimum, max gap " + fmt(worst, 3)};
}

// ------------------------------------------------------------------ 7

Corpus with_own_vocab(std::vector<Sentence> sentences) {
  const Vocabulary vocab = Vocabulary::build(sentences);
  return with_vocabulary(std::move(sentences), vocab);
}

Outcome overfit(const std::string& configs) {
  const RunConfig base = read_config_file(configs + "/overfit.cfg");
  GeneratorConfig gen;
  gen.sentences = 20;
  const Corpus data = with_own_vocab(generate_synthetic(gen, 77).sentences);
  bool ok = true;
  double slowest = 0.0, lowest = 1.0;
  std::size_t most_epochs = 0;
  for (const auto& v : testutil::all_variants()) {
    const auto start = Clock::now();
    RunConfig cfg = base;
    apply_variant(cfg.model, v);
    Model<float> model(cfg.model, data.vocab.size(), 1);
    TrainHooks hooks;
    hooks.stop = [](const EpochRecord& r) { return r.dev_f1 >= 0.99; };
    TrainResult r = train(model, data, data, cfg.train, hooks);
    const double secs = elapsed(start);
    std::cerr << "  overfit " << v << ": train F1 " << fmt(r.best_dev_f1) << " after " << r.history.epochs.size()
              << " epochs, " << fmt(secs, 3) << " s\n";
    ok = ok && r.best_dev_f1 >= 0.99 && secs < 180.0;
    slowest = std::max(slowest, secs);
    lowest = std::min(lowest, r.best_dev_f1);
    most_epochs = std::max(most_epochs, r.history.epochs.size());
  }
  return {ok, "12 variants, lowest training F1 " + fmt(lowest) + ", at most " + std::to_string(most_epochs) +
                  " epochs, slowest " + fmt(slowest, 3) + " s"};
}

// ------------------------------------------------------------------ 8

Outcome directional(const std::string& configs) {
  const auto start = Clock::now();
  const GeneratorConfig gen = read_generator_config(configs + "/directional-data.cfg");
  const RunConfig base = read_config_file(configs + "/directional.cfg");
  const std::uint64_t data_seed = 2024;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const CorpusSplit parts = split(generate_synthetic(gen, data_seed), {0.8, 0.1, 0.1}, data_seed);
  const Vocabulary vocab = Vocabulary::build(parts.train.sentences);
  const Corpus train_set = with_vocabulary(parts.train.sentences, vocab);
  const Corpus dev = with_vocabulary(parts.dev.sentences, vocab);
  const Corpus test = with_vocabulary(parts.test.sentences, vocab);
  std::cerr << "  corpus " << train_set.sentences.size() << " / " << dev.sentences.size() << " / "
            << test.sentences.size() << "\n";

  std::map<std::string, std::pair<double, double>> means;  // variant -> (ALL, Zero)
  for (const char* v : {"base", "mp-pool-selfatt"}) {
    double all = 0.0, zero = 0.0;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      apply_variant(cfg.model, v);
      cfg.train.seed = seed;
      Model<float> model(cfg.model, vocab.size(), seed);
      TrainResult r = train(model, train_set, dev, cfg.train);
      EvalReport rep = evaluate(test.sentences, predict_corpus(model, test), r.thresholds);
      std::cerr << "  " << v << " seed " << seed << ": test F1 " << fmt(100 * rep.f1()) << " Zero "
                << fmt(100 * rep.at(Stratum::kZero).f1()) << " (dev " << fmt(100 * r.best_dev_f1) << ", "
                << fmt(elapsed(start), 4) << " s elapsed)\n";
      all += rep.f1();
      zero += rep.at(Stratum::kZero).f1();
    }
    means[v] = {all / static_cast<double>(seeds.size()), zero / static_cast<double>(seeds.size())};
  }
  const double secs = elapsed(start);
  const auto& b = means["base"];
  const auto& m = means["mp-pool-selfatt"];
  return {m.second >= b.second && m.first >= b.first && secs < 1800.0,
          "mean Zero F1 MP-POOL-SELFATT " + fmt(100 * m.second) + " vs BASE " + fmt(100 * b.second) +
              ", overall " + fmt(100 * m.first) + " vs " + fmt(100 * b.first) + ", " + fmt(secs, 4) + " s"};
}

// ------------------------------------------------------------------ 9

Outcome lr_schedule() {
  GeneratorConfig gen;
  gen.sentences = 10;
  const Corpus data = with_own_vocab(generate_synthetic(gen, 9).sentences);
  Model<double> model(testutil::small_config("base", 4, 1), data.vocab.size(), 1);
  TrainConfig cfg;
  cfg.learning_rate = 2e-4;
  cfg.patience = 4;
  cfg.lr_floor_factor = 1.0 / 16.0;
  cfg.max_epochs = 1000;
  TrainHooks hooks;
  hooks.dev_f1 = [](std::size_t epoch) { return epoch == 1 ? 0.5 : 0.6; };
  TrainResult r = train(model, data, data, cfg, hooks);
  // Best at epoch 2, then four stale epochs per rate.
  bool ok = r.history.epochs.size() == 22 && r.history.restarts() == 4 &&
            r.history.epochs.back().event == ScheduleEvent::kStop;
  std::vector<double> rates;
  for (const auto& e : r.history.epochs) {
    const double expected =
        e.epoch <= 6 ? 2e-4 : e.epoch <= 10 ? 1e-4 : e.epoch <= 14 ? 5e-5 : e.epoch <= 18 ? 2.5e-5 : 1.25e-5;
    const bool restart = e.epoch == 6 || e.epoch == 10 || e.epoch == 14 || e.epoch == 18;
    ok = ok && e.lr == expected && (e.event == ScheduleEvent::kRestart) == restart;
    if (rates.empty() || rates.back() != e.lr) rates.push_back(e.lr);
  }
  ok = ok && rates.back() >= cfg.learning_rate / 16.0 && rates.back() / 2 < cfg.learning_rate / 16.0;
  std::ostringstream d;
  d << r.history.epochs.size() << " epochs, " << r.history.restarts() << " halvings, rates";
  for (double v : rates) d << ' ' << v;
  d << ", stop at epoch " << r.history.epochs.back().epoch;
  return {ok, d.str()};
}

// ----------------------------------------------------------------- 10

// Exact one-sided p-value by enumerating all group assignments.
double exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const std::size_t n = all.size(), k = a.size();
  const double total = std::accumulate(all.begin(), all.end(), 0.0);
  const auto diff = [&](double sum_a) {
    return sum_a / static_cast<double>(k) - (total - sum_a) / static_cast<double>(n - k);
  };
  const double observed = diff(std::accumulate(a.begin(), a.end(), 0.0));
  std::size_t hits = 0, splits = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      if (mask & (1u << t)) s += all[t];
    ++splits;
    hits += diff(s) >= observed - 1e-12;
  }
  return static_cast<double>(hits) / static_cast<double>(splits);
}

Outcome permutation_test_check() {
  Rng rng(1010);
  double worst_exact = 0.0, worst_mc = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(4), b(4);
    for (double& v : a) v = 0.80 + rng.uniform(0.0, 0.05);
    for (double& v : b) v = 0.79 + rng.uniform(0.0, 0.05);
    const SignificanceResult ex = permutation_test(a, b);
    const SignificanceResult mc = permutation_test(a, b, 100 + static_cast<std::uint64_t>(trial), 0, 100000);
    worst_exact = std::max(worst_exact, std::abs(ex.p_value - exact_p(a, b)));
    worst_mc = std::max(worst_mc, std::abs(ex.p_value - mc.p_value));
  }
  std::vector<double> hi(10, 1.0), lo(10, 0.0);
  for (std::size_t k = 0; k < 10; ++k) {
    hi[k] = 0.86 + 0.001 * static_cast<double>(k);
    lo[k] = 0.80 + 0.001 * static_cast<double>(k);
  }
  const SignificanceResult extreme = permutation_test(hi, lo);
  const double target = 1.0 / static_cast<double>(binomial(20, 10));
  const bool ok = worst_exact < 1e-12 && worst_mc < 0.01 && extreme.exact &&
                  std::abs(extreme.p_value - target) <= 1e-12 * target;
  return {ok, "4v4 exact vs enumeration " + fmt(worst_exact, 3) + ", exact vs Monte Carlo max " + fmt(worst_mc, 3) +
                  ", disjoint 10v10 p = " + fmt(extreme.p_value, 4)};
}

// ----------------------------------------------------------------- 11

int run_in(const fs::path& dir, const std::string& cli, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " >>log.txt 2>&1";
  return std::system(cmd.c_str());
}

Outcome determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / ("pasnet-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string cfg_text =
      "d_w = 8\nd_r = 8\nK = 2\nd_f = 8\ndropout_rate = 0.1\nlearning_rate = 0.001\nmax_epochs = 2\n";
  std::vector<fs::path> dirs{root / "a", root / "b"};
  for (const auto& d : dirs) {
    fs::create_directories(d);
    write_file_bytes((d / "tiny.cfg").string(), cfg_text);
    const int rc = run_in(d, cli, "gen-data --sentences 120 --seed 5 --out data") +
                   run_in(d, cli,
                          "train --data data --config tiny.cfg --variant mp-pool-selfatt --seeds 1..2 --quiet "
                          "--out runs") +
                   run_in(d, cli, "eval --model runs/seed-1 --model runs/seed-2 --data data/test.txt --out eval");
    if (rc != 0) return {false, "pipeline command failed in " + d.string()};
  }
  std::vector<std::string> files{"data/train.txt",    "data/dev.txt",          "data/test.txt",
                                 "eval/report-1.txt", "eval/report-1.json",    "eval/report-2.txt",
                                 "eval/report-2.json", "eval/f1.txt",          "eval/zero_f1.txt"};
  for (const char* seed : {"seed-1", "seed-2"})
    for (auto name : {RunFiles::kCheckpoint, RunFiles::kConfig, RunFiles::kVocab, RunFiles::kThresholds,
                      RunFiles::kHistory})
      files.push_back(std::string("runs/") + seed + "/" + std::string(name));
  std::size_t same = 0;
  std::string differs;
  for (const auto& f : files) {
    if (read_file_bytes((dirs[0] / f).string()) == read_file_bytes((dirs[1] / f).string())) ++same;
    else differs += " " + f;
  }
  std::size_t manifests_same = 0;
  for (const char* f : {"data/manifest.json", "runs/manifest.json", "eval/manifest.json"}) {
    auto strip = [&](const fs::path& d) {
      auto j = nlohmann::json::parse(read_file_bytes((d / f).string()));
      j.erase("wall_clock_seconds");
      return j;
    };
    manifests_same += strip(dirs[0]) == strip(dirs[1]);
  }
  fs::remove_all(root);
  const bool ok = same == files.size() && manifests_same == 3;
  return {ok, std::to_string(same) + "/" + std::to_string(files.size()) + " artifacts bitwise identical, " +
                  std::to_string(manifests_same) + "/3 manifests equal apart from wall clock" +
                  (differs.empty() ? "" : "; differ:" + differs)};
}

// ----------------------------------------------------------------- 12

template <typename Fn>
bool rejects(Fn&& fn) {
  try {
    fn();
  } catch (const FormatError&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

Outcome checkpoint_check() {
  std::size_t exact = 0, rejected = 0, corruptions = 0;
  for (const auto& v : testutil::all_variants()) {
    const HyperConfig cfg = testutil::small_config(v, 6, 2);
    Model<float> a(cfg, 15, 3);
    const std::string bytes = save_checkpoint(a.params());
    Model<float> b(cfg, 15, 99);
    load_checkpoint_into(b.params(), bytes);
    bool same = save_checkpoint(b.params()) == bytes;
    for (std::size_t k = 0; k < a.params().size(); ++k) {
      const auto& x = a.params()[k].value;
      const auto& y = b.params()[k].value;
      same = same && x.shape() == y.shape() && std::memcmp(x.raw(), y.raw(), x.size() * sizeof(float)) == 0;
    }
    exact += same;

    std::vector<std::string> bad;
    std::string s = bytes;
    s[0] = 'X';
    bad.push_back(s);
    s = bytes;
    s[6] = static_cast<char>(s[6] + 1);
    bad.push_back(s);
    s = bytes;
    s[8] = static_cast<char>(s[8] + 1);
    bad.push_back(s);
    bad.push_back(bytes + '\0');
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{9}, std::size_t{13}, bytes.size() / 2,
                            bytes.size() - 1})
      bad.push_back(bytes.substr(0, cut));
    s = bytes;
    s[14] = static_cast<char>(s[14] ^ 0x20);  // first byte of the first tensor name
    bad.push_back(s);
    for (const auto& corrupt : bad) {
      ++corruptions;
      Model<float> c(cfg, 15, 5);
      rejected += rejects([&] { load_checkpoint_into(c.params(), corrupt); });
    }
    // A checkpoint of another shape is rejected too.
    ++corruptions;
    Model<float> wider(testutil::small_config(v, 7, 2), 15, 5);
    rejected += rejects([&] { load_checkpoint_into(wider.params(), bytes); });
  }
  return {exact == 12 && rejected == corruptions,
          "bit-exact round trip " + std::to_string(exact) + "/12 variants, rejected " + std::to_string(rejected) +
              "/" + std::to_string(corruptions) + " corrupted files with format errors"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string configs = PASNET_CONFIG_DIR;
  std::string cli = PASNET_CLI_PATH;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--configs", configs, "Directory of pinned configs")->capture_default_str();
  app.add_option("--cli", cli, "Path of the pasnet executable")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"attention normalization", attention_normalization},
      {"pooling permutation invariance", permutation_invariance},
      {"attention count", attention_counts},
      {"decode oracle", decode_oracle_check},
      {"threshold search", threshold_search_check},
      {"overfit", [&] { return overfit(configs); }},
      {"directional synthetic experiment", [&] { return directional(configs); }},
      {"lr schedule", lr_schedule},
      {"permutation test", permutation_test_check},
      {"determinism", [&] { return determinism(cli); }},
      {"checkpoint round trip", checkpoint_check},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    std::cerr << "running " << id << " " << criteria[k].first << "\n";
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << id << "  " << criteria[k].first << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
