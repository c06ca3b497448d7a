#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "pasnet/config.hpp"
#include "pasnet/corpus.hpp"
#include "pasnet/rng.hpp"
#include "pasnet/tensor.hpp"

namespace testutil {

using pasnet::Label;
using pasnet::Rng;
using pasnet::Sentence;
using pasnet::Shape;
using pasnet::Tensor;

template <typename T = double>
Tensor<T> random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(-scale, scale));
  return t;
}

// Random head-final sentence: contiguous bunsetsu, each attached to a later
// one, distinct predicates, and random gold clusters.
inline Sentence random_sentence(Rng& rng, std::size_t n, std::size_t q, const std::string& id = "r") {
  Sentence s;
  s.id = id;
  int b = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0 && rng.bernoulli(0.6)) ++b;
    s.tokens.push_back("w" + std::to_string(rng.range(0, 9)));
    s.bunsetsu_of.push_back(b);
  }
  const int nb = b + 1;
  for (int k = 0; k < nb; ++k) s.bunsetsu_head.push_back(k + 1 < nb ? static_cast<int>(rng.range(k + 1, nb - 1)) : -1);
  std::vector<int> positions(n);
  for (std::size_t t = 0; t < n; ++t) positions[t] = static_cast<int>(t);
  rng.shuffle(positions);
  positions.resize(std::min(q, n));
  std::sort(positions.begin(), positions.end());
  s.predicates = positions;
  int cid = 1;
  for (std::size_t i = 0; i < s.q(); ++i) {
    for (Label c : pasnet::kArgLabels) {
      if (!rng.bernoulli(0.6)) continue;
      std::vector<int> members{static_cast<int>(rng.range(0, static_cast<std::int64_t>(n) - 1))};
      if (rng.bernoulli(0.3)) {
        const int extra = static_cast<int>(rng.range(0, static_cast<std::int64_t>(n) - 1));
        if (extra != members[0]) members.push_back(extra);
      }
      std::sort(members.begin(), members.end());
      s.clusters[cid] = members;
      s.gold_args[{static_cast<int>(i), c}] = cid;
      ++cid;
    }
  }
  return s;
}

// Breadth-first distance between two bunsetsu of the undirected tree.
inline int bfs_distance(const Sentence& s, int from, int to) {
  const int nb = static_cast<int>(s.bunsetsu_head.size());
  std::vector<std::vector<int>> adj(nb);
  for (int k = 0; k < nb; ++k) {
    if (s.bunsetsu_head[k] >= 0) {
      adj[k].push_back(s.bunsetsu_head[k]);
      adj[s.bunsetsu_head[k]].push_back(k);
    }
  }
  std::vector<int> dist(nb, -1);
  std::deque<int> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist[to];
}

inline pasnet::HyperConfig small_config(const std::string& variant, std::size_t d = 8, std::size_t K = 3) {
  pasnet::HyperConfig cfg;
  cfg.d_w = d;
  cfg.d_r = d;
  cfg.d_f = d;
  cfg.K = K;
  cfg.dropout_rate = 0.0;
  pasnet::apply_variant(cfg, variant);
  return cfg;
}

inline const std::vector<std::string>& all_variants() {
  static const std::vector<std::string> v = {"base", "pool", "att-pool", "pool-selfatt", "selfatt", "grid",
                                             "mp", "mp-pool", "mp-att-pool", "mp-pool-selfatt", "mp-selfatt",
                                             "mp-grid"};
  return v;
}

}  // namespace testutil
