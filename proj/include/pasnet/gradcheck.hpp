#pragma once

#include <functional>
#include <span>
#include <string>

#include "pasnet/autograd.hpp"

namespace pasnet {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<tensor>[<index>]" of the largest error
  std::size_t coordinates = 0;
};

// Compares reverse-mode gradients against central differences. The error
// per coordinate is |analytic - numeric| / max(1, |analytic|, |numeric|).
// Throws UsageError if the function records random ops (active dropout).
GradCheckResult finite_diff_check(const std::function<Var<double>(Tape<double>&, Var<double>)>& f,
                                  const Tensor<double>& x, double eps = 1e-5);

// Same check with respect to every coordinate of a set of parameters.
// `loss` builds the scalar from scratch on the tape it is given.
GradCheckResult finite_diff_check(const std::function<Var<double>(Tape<double>&)>& loss,
                                  std::span<Parameter<double>* const> params, double eps = 1e-5);

}  // namespace pasnet
