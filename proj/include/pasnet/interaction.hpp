#pragma once

#include <vector>

#include "pasnet/config.hpp"
#include "pasnet/ops.hpp"
#include "pasnet/params.hpp"

namespace pasnet {

// Parameters of the layer between the encoder and the softmax. Blocks a
// variant does not use stay null.
template <typename T>
struct InteractionParams {
  Parameter<T>* w_f = nullptr;  // pair transform       [d_f x 2 d_r]
  Parameter<T>* b_f = nullptr;
  Parameter<T>* w_g = nullptr;  // attention feature    [d_f x 2 d_in]
  Parameter<T>* b_g = nullptr;
  Parameter<T>* w_a = nullptr;  // attention score row  [1 x d_f]
  Parameter<T>* b_a = nullptr;  // [1]
  Parameter<T>* w_h = nullptr;  // combine transform    [d_f x 2 d_in]
  Parameter<T>* b_h = nullptr;
};

// "int.<name>" parameters for the configured variant.
template <typename T>
InteractionParams<T> add_interaction_params(ParamStore<T>& store, const HyperConfig& cfg);

// Width of the vectors fed to the softmax layer.
std::size_t interaction_width(const HyperConfig& cfg);

// One normalized attention matrix: row t holds a(t') over source tokens.
struct AttentionMatrix {
  int target = 0;  // predicate i
  int source = 0;  // predicate j, or -1 for self-attention
  std::size_t n = 0;
  std::vector<double> weights;  // row-major [n x n]
};

// Counts every attention distribution computed; keeps the matrices only
// when `retain` is set.
struct AttentionTrace {
  bool retain = false;
  std::size_t distributions = 0;
  std::vector<AttentionMatrix> matrices;
};

template <typename T>
using HiddenGrid = std::vector<Var<T>>;  // q rows of [n x d]

// h_{i,t} = maxpool_j ReLU(W_f[h_{i,t}, h_{j,t}] + b_f), j ranging over all
// predicates including i.
template <typename T>
HiddenGrid<T> pool_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p);

// For every (i, j, t): attention of h_{i,t} over h_{j,.}, a ReLU transform of
// [h_{i,t}, summary], then max pooling over j. Computes n q^2 distributions.
template <typename T>
HiddenGrid<T> att_pool_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p, AttentionTrace* trace = nullptr);

// Pool, then self-attention within each row: n q distributions.
template <typename T>
HiddenGrid<T> pool_selfatt_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p,
                                 AttentionTrace* trace = nullptr);

// Self-attention within each row only; rows never exchange information.
template <typename T>
HiddenGrid<T> selfatt_layer(const HiddenGrid<T>& h, const InteractionParams<T>& p, AttentionTrace* trace = nullptr);

template <typename T>
HiddenGrid<T> base_passthrough(const HiddenGrid<T>& h) {
  return h;
}

// Dispatches on the variant; BASE and GRID pass through.
template <typename T>
HiddenGrid<T> apply_interaction(const HyperConfig& cfg, const HiddenGrid<T>& h, const InteractionParams<T>& p,
                                AttentionTrace* trace = nullptr);

}  // namespace pasnet
