#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pasnet/autograd.hpp"
#include "pasnet/rng.hpp"

namespace pasnet {

enum class Activation { kRelu, kTanh, kSigmoid };

// Differentiable operations. Unless stated otherwise, tensors of rank >= 2
// are treated as a stack of rows along their last axis.

// y = W x + b applied to every row of x. W is [m x k], x is [..., k], b is [m].
template <typename T>
Var<T> affine(Var<T> w, Var<T> x, std::optional<Var<T>> b);
template <typename T>
Var<T> affine(Var<T> w, Var<T> x, Var<T> b) {
  return affine(w, x, std::optional<Var<T>>(b));
}
template <typename T>
Var<T> linear(Var<T> w, Var<T> x) {
  return affine(w, x, std::optional<Var<T>>());
}

// [a x b] * [b x c]
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);

template <typename T>
Var<T> activation(Activation kind, Var<T> x);
template <typename T>
Var<T> relu(Var<T> x) { return activation(Activation::kRelu, x); }
template <typename T>
Var<T> tanh(Var<T> x) { return activation(Activation::kTanh, x); }
template <typename T>
Var<T> sigmoid(Var<T> x) { return activation(Activation::kSigmoid, x); }

// Softmax over the last axis, computed with max subtraction.
template <typename T>
Var<T> softmax(Var<T> x);

// Elementwise max over a nonempty set of same-shaped tensors. The gradient
// of each element goes to the first input attaining the max.
template <typename T>
Var<T> maxpool_set(std::span<const Var<T>> vs);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);

// Concatenation along the last axis; leading axes must agree.
template <typename T>
Var<T> concat(Var<T> a, Var<T> b);
// Columns [begin, begin + len) of the last axis.
template <typename T>
Var<T> slice(Var<T> x, std::size_t begin, std::size_t len);

// Row r of a matrix, as a vector.
template <typename T>
Var<T> row(Var<T> x, std::size_t r);
// Stacks equally sized vectors into a matrix.
template <typename T>
Var<T> stack(std::span<const Var<T>> rows);
// Rows of a table selected by index (embedding lookup).
template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const std::int32_t> ids);
// out[i][j] = u[i] + v[j] for u [a x d], v [b x d]; result is [a x b x d].
template <typename T>
Var<T> pairwise_sum(Var<T> u, Var<T> v);
template <typename T>
Var<T> reshape(Var<T> x, Shape shape);

template <typename T>
Var<T> sum(Var<T> x);
template <typename T>
Var<T> dot(Var<T> a, Var<T> b) { return sum(mul(a, b)); }

// Inverted dropout. With rate 0 this is the identity and records nothing
// random.
template <typename T>
Var<T> dropout(Var<T> x, double rate, Rng& rng);

// -log(max(p[gold], 1e-12)) for a probability vector.
template <typename T>
Var<T> nll_loss(Var<T> probs, int gold);
// Sum of nll_loss over the rows of a [n x C] probability matrix.
template <typename T>
Var<T> nll_rows(Var<T> probs, std::span<const int> gold);

}  // namespace pasnet
