#pragma once

#include <span>
#include <vector>

#include "pasnet/encoder.hpp"

namespace pasnet {

// Grid RNN baseline. Layer k of predicate row i reads, besides h^{k-1}_{i,t},
// the same layer's state of the neighbouring predicate row: row i-1 for odd
// layers (rows visited in ascending order), row i+1 for even layers
// (descending). Rows outside 1..q contribute zero vectors.
template <typename T>
EncoderParams<T> add_grid_params(ParamStore<T>& store, const HyperConfig& cfg, std::size_t vocab_size);

template <typename T>
std::vector<Var<T>> grid_forward(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids,
                                 const EncoderParams<T>& params, const HyperConfig& cfg, const RunOptions& opts);

}  // namespace pasnet
