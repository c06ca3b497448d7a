#include <doctest.h>

#include <numeric>

#include "oracle.hpp"
#include "pasnet/gradcheck.hpp"
#include "pasnet/interaction.hpp"
#include "test_util.hpp"

using namespace pasnet;
using oracle::Mat;
using oracle::Vec;

namespace {

struct Fixture {
  HyperConfig cfg;
  ParamStore<double> store;
  InteractionParams<double> p;

  Fixture(const std::string& variant, std::size_t dr, std::size_t df, std::uint64_t seed = 1) {
    cfg = testutil::small_config(variant, dr);
    cfg.d_f = df;
    p = add_interaction_params(store, cfg);
    Rng rng(seed);
    for (auto* param : store.all()) init_uniform(*param, 0.6, rng);
  }
};

std::vector<Tensor<double>> random_grid(Rng& rng, std::size_t q, std::size_t n, std::size_t d) {
  std::vector<Tensor<double>> g;
  for (std::size_t i = 0; i < q; ++i) g.push_back(testutil::random_tensor({n, d}, rng));
  return g;
}

HiddenGrid<double> constants(Tape<double>& tape, const std::vector<Tensor<double>>& g) {
  HiddenGrid<double> out;
  for (const auto& t : g) out.push_back(tape.constant(t));
  return out;
}

std::vector<Tensor<double>> values(const HiddenGrid<double>& g) {
  std::vector<Tensor<double>> out;
  for (const auto& v : g) out.push_back(v.value());
  return out;
}

// ---- scalar oracles ----

Vec pair_relu(const Parameter<double>& w, const Parameter<double>& b, const Vec& x, const Vec& y) {
  return oracle::relu(oracle::affine2(w.value, x, y, b.value));
}

Vec attention_weights(const InteractionParams<double>& p, const Vec& query, const Mat& src) {
  Vec scores;
  for (const auto& x : src) {
    const Vec g = oracle::tanh(oracle::affine2(p.w_g->value, query, x, p.b_g->value));
    double s = p.b_a->value[0];
    for (std::size_t k = 0; k < g.size(); ++k) s += p.w_a->value.at(0, k) * g[k];
    scores.push_back(s);
  }
  return oracle::softmax(scores);
}

Vec weighted_sum(const Vec& a, const Mat& src) {
  Vec out(src[0].size(), 0.0);
  for (std::size_t t = 0; t < src.size(); ++t)
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += a[t] * src[t][c];
  return out;
}

std::vector<Mat> pool_oracle(const InteractionParams<double>& p, const std::vector<Mat>& h) {
  std::vector<Mat> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t t = 0; t < h[i].size(); ++t) {
      std::vector<Vec> branches;
      for (const auto& hj : h) branches.push_back(pair_relu(*p.w_f, *p.b_f, h[i][t], hj[t]));
      out[i].push_back(oracle::elementwise_max(branches));
    }
  return out;
}

std::vector<Mat> att_pool_oracle(const InteractionParams<double>& p, const std::vector<Mat>& h) {
  std::vector<Mat> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t t = 0; t < h[i].size(); ++t) {
      std::vector<Vec> branches;
      for (const auto& hj : h) {
        const Vec summary = weighted_sum(attention_weights(p, h[i][t], hj), hj);
        branches.push_back(pair_relu(*p.w_f, *p.b_f, h[i][t], summary));
      }
      out[i].push_back(oracle::elementwise_max(branches));
    }
  return out;
}

Mat selfatt_row_oracle(const InteractionParams<double>& p, const Mat& row) {
  Mat out;
  for (const auto& x : row) {
    const Vec summary = weighted_sum(attention_weights(p, x, row), row);
    out.push_back(pair_relu(*p.w_h, *p.b_h, x, summary));
  }
  return out;
}

std::vector<Mat> to_mats(const std::vector<Tensor<double>>& g) {
  std::vector<Mat> out;
  for (const auto& t : g) out.push_back(oracle::to_mat(t));
  return out;
}

double grid_diff(const std::vector<Mat>& expected, const HiddenGrid<double>& got) {
  REQUIRE(expected.size() == got.size());
  double m = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) m = std::max(m, oracle::max_abs_diff(expected[i], got[i].value()));
  return m;
}

}  // namespace

TEST_CASE("parameter blocks per variant") {
  auto names = [](const std::string& v) {
    Fixture fx(v, 4, 5);
    std::vector<std::string> out;
    for (auto* param : fx.store.all()) out.push_back(param->name);
    return out;
  };
  CHECK(names("base").empty());
  CHECK(names("grid").empty());
  CHECK(names("pool") == std::vector<std::string>{"int.W_f", "int.b_f"});
  CHECK(names("att-pool") == std::vector<std::string>{"int.W_f", "int.b_f", "int.W_g", "int.b_g", "int.W_a", "int.b_a"});
  CHECK(names("selfatt") == std::vector<std::string>{"int.W_g", "int.b_g", "int.W_a", "int.b_a", "int.W_h", "int.b_h"});
  Fixture ps("pool-selfatt", 4, 5);
  CHECK(ps.p.w_f->value.shape() == Shape{5, 8});
  CHECK(ps.p.w_g->value.shape() == Shape{5, 10});
  CHECK(ps.p.w_h->value.shape() == Shape{5, 10});
  CHECK(ps.p.w_a->value.shape() == Shape{1, 5});
  CHECK(interaction_width(ps.cfg) == 5);
  CHECK(interaction_width(Fixture("base", 4, 5).cfg) == 4);
}

TEST_CASE("pool layer") {
  Rng rng(1);
  Fixture fx("pool", 4, 5);
  {
    auto g = random_grid(rng, 1, 3, 4);
    Tape<double> tape;
    auto out = pool_layer(constants(tape, g), fx.p);
    Mat expected;
    for (const auto& x : oracle::to_mat(g[0])) expected.push_back(pair_relu(*fx.p.w_f, *fx.p.b_f, x, x));
    CHECK(oracle::max_abs_diff(expected, out[0].value()) < 1e-12);
  }
  for (std::size_t q : {2u, 3u, 4u}) {
    auto g = random_grid(rng, q, 5, 4);
    Tape<double> tape;
    auto out = pool_layer(constants(tape, g), fx.p);
    CHECK(grid_diff(pool_oracle(fx.p, to_mats(g)), out) < 1e-12);
    CHECK(out[0].shape() == Shape{5, 5});
  }
  // Reordering the rows permutes the outputs and nothing else.
  auto g = random_grid(rng, 4, 3, 4);
  std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<Tensor<double>> shuffled;
  for (auto k : perm) shuffled.push_back(g[k]);
  Tape<double> tape;
  auto a = values(pool_layer(constants(tape, g), fx.p));
  auto b = values(pool_layer(constants(tape, shuffled), fx.p));
  for (std::size_t k = 0; k < perm.size(); ++k) CHECK(b[k] == a[perm[k]]);
  HiddenGrid<double> empty;
  CHECK_THROWS_AS(pool_layer(empty, fx.p), UsageError);
  Fixture wrong("selfatt", 4, 5);
  CHECK_THROWS_AS(pool_layer(constants(tape, g), wrong.p), UsageError);
}

TEST_CASE("att-pool layer") {
  Rng rng(2);
  Fixture fx("att-pool", 4, 5, 3);
  {
    auto g = random_grid(rng, 2, 3, 4);
    AttentionTrace trace;
    trace.retain = true;
    Tape<double> tape;
    auto out = att_pool_layer(constants(tape, g), fx.p, &trace);
    CHECK(grid_diff(att_pool_oracle(fx.p, to_mats(g)), out) < 1e-10);
    CHECK(trace.distributions == 3 * 2 * 2);
    REQUIRE(trace.matrices.size() == 4);
    const auto& m = trace.matrices[1];
    CHECK(m.target == 0);
    CHECK(m.source == 1);
    const Vec a = attention_weights(fx.p, oracle::to_mat(g[0])[2], oracle::to_mat(g[1]));
    for (std::size_t t = 0; t < 3; ++t) CHECK(std::abs(m.weights[2 * 3 + t] - a[t]) < 1e-12);
  }
  {
    // n = 1: the summary is the single source vector.
    auto g = random_grid(rng, 3, 1, 4);
    AttentionTrace trace;
    trace.retain = true;
    Tape<double> tape;
    auto out = att_pool_layer(constants(tape, g), fx.p, &trace);
    for (const auto& m : trace.matrices) CHECK(m.weights == std::vector<double>{1.0});
    std::vector<Mat> expected(3);
    for (std::size_t i = 0; i < 3; ++i) {
      std::vector<Vec> branches;
      for (std::size_t j = 0; j < 3; ++j)
        branches.push_back(pair_relu(*fx.p.w_f, *fx.p.b_f, oracle::to_vec(g[i]), oracle::to_vec(g[j])));
      expected[i].push_back(oracle::elementwise_max(branches));
    }
    CHECK(grid_diff(expected, out) < 1e-12);
  }
  {
    auto g = random_grid(rng, 3, 4, 4);
    AttentionTrace before, after;
    before.retain = after.retain = true;
    Tape<double> tape;
    att_pool_layer(constants(tape, g), fx.p, &before);
    fx.p.b_a->value[0] += 3.7;
    att_pool_layer(constants(tape, g), fx.p, &after);
    fx.p.b_a->value[0] -= 3.7;
    REQUIRE(before.matrices.size() == after.matrices.size());
    for (std::size_t k = 0; k < before.matrices.size(); ++k)
      for (std::size_t w = 0; w < before.matrices[k].weights.size(); ++w)
        CHECK(std::abs(before.matrices[k].weights[w] - after.matrices[k].weights[w]) < 1e-12);
  }
}

TEST_CASE("pool-selfatt layer") {
  Rng rng(3);
  Fixture fx("pool-selfatt", 4, 5, 5);
  for (std::size_t q : {1u, 3u}) {
    auto g = random_grid(rng, q, 4, 4);
    AttentionTrace trace;
    Tape<double> tape;
    auto out = pool_selfatt_layer(constants(tape, g), fx.p, &trace);
    std::vector<Mat> expected;
    for (const auto& m : pool_oracle(fx.p, to_mats(g))) expected.push_back(selfatt_row_oracle(fx.p, m));
    CHECK(grid_diff(expected, out) < 1e-10);
    CHECK(trace.distributions == 4 * q);
  }
  auto g = random_grid(rng, 3, 4, 4);
  std::vector<Tensor<double>> shuffled{g[1], g[2], g[0]};
  Tape<double> tape;
  auto a = values(pool_selfatt_layer(constants(tape, g), fx.p));
  auto b = values(pool_selfatt_layer(constants(tape, shuffled), fx.p));
  CHECK(b[0] == a[1]);
  CHECK(b[1] == a[2]);
  CHECK(b[2] == a[0]);
}

TEST_CASE("selfatt layer") {
  Rng rng(4);
  Fixture fx("selfatt", 4, 5, 7);
  {
    auto g = random_grid(rng, 2, 5, 4);
    AttentionTrace trace;
    trace.retain = true;
    Tape<double> tape;
    auto out = selfatt_layer(constants(tape, g), fx.p, &trace);
    std::vector<Mat> expected;
    for (const auto& m : to_mats(g)) expected.push_back(selfatt_row_oracle(fx.p, m));
    CHECK(grid_diff(expected, out) < 1e-10);
    CHECK(trace.distributions == 10);
    for (const auto& m : trace.matrices) CHECK(m.source == -1);
  }
  {
    auto g = random_grid(rng, 1, 1, 4);
    Tape<double> tape;
    auto out = selfatt_layer(constants(tape, g), fx.p);
    const Vec x = oracle::to_vec(g[0]);
    CHECK(oracle::max_abs_diff({pair_relu(*fx.p.w_h, *fx.p.b_h, x, x)}, out[0].value()) < 1e-12);
  }
  {
    auto g = random_grid(rng, 3, 4, 4);
    Tape<double> tape;
    auto a = values(selfatt_layer(constants(tape, g), fx.p));
    g[0] = testutil::random_tensor({4, 4}, rng);
    g[2] = testutil::random_tensor({4, 4}, rng, 5.0);
    auto b = values(selfatt_layer(constants(tape, g), fx.p));
    CHECK(a[1] == b[1]);
    CHECK(a[0] != b[0]);
  }
}

TEST_CASE("attention distributions are normalized") {
  Rng rng(5);
  for (const char* v : {"att-pool", "pool-selfatt", "selfatt"}) {
    Fixture fx(v, 4, 6, 9);
    for (std::size_t n : {1u, 2u, 7u}) {
      auto g = random_grid(rng, 3, n, 4);
      AttentionTrace trace;
      trace.retain = true;
      Tape<double> tape;
      apply_interaction(fx.cfg, constants(tape, g), fx.p, &trace);
      const std::size_t expected = std::string(v) == "att-pool" ? n * 9 : n * 3;
      CHECK(trace.distributions == expected);
      std::size_t rows = 0;
      for (const auto& m : trace.matrices)
        for (std::size_t t = 0; t < m.n; ++t) {
          ++rows;
          const double total = std::accumulate(m.weights.begin() + t * m.n, m.weights.begin() + (t + 1) * m.n, 0.0);
          CHECK(std::abs(total - 1.0) < 1e-6);
        }
      CHECK(rows == expected);
    }
  }
}

TEST_CASE("base passthrough is the identity") {
  Rng rng(6);
  Fixture fx("base", 4, 4);
  for (int k = 0; k < 3; ++k) {
    auto g = random_grid(rng, 1 + k, 3, 4);
    Tape<double> tape;
    CHECK(values(apply_interaction(fx.cfg, constants(tape, g), fx.p)) == g);
  }
}

TEST_CASE("interaction gradients pass the finite difference check") {
  Rng rng(7);
  for (const char* v : {"pool", "att-pool", "pool-selfatt", "selfatt"}) {
    CAPTURE(v);
    Fixture fx(v, 3, 4, 11);
    ParamStore<double> inputs;
    std::vector<Parameter<double>*> rows;
    for (int i = 0; i < 3; ++i) {
      auto& r = inputs.add("h" + std::to_string(i), {4, 3});
      r.value = testutil::random_tensor({4, 3}, rng);
      rows.push_back(&r);
    }
    const auto weights = testutil::random_tensor({4, 4}, rng);
    auto loss = [&](Tape<double>& tape) {
      HiddenGrid<double> h;
      for (auto* r : rows) h.push_back(tape.parameter(*r));
      auto out = apply_interaction(fx.cfg, h, fx.p);
      Var<double> total = sum(mul(out[0], tape.constant(weights)));
      for (std::size_t i = 1; i < out.size(); ++i) total = add(total, sum(mul(out[i], tape.constant(weights))));
      return total;
    };
    auto params = fx.store.all();
    params.insert(params.end(), rows.begin(), rows.end());
    auto res = finite_diff_check(loss, params);
    CAPTURE(res.worst);
    CHECK(res.max_rel_error < 1e-4);
  }
}
