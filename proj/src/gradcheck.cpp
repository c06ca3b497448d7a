#include "pasnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pasnet {
namespace {

void note(GradCheckResult& r, double analytic, double numeric, const std::string& where) {
  const double err =
      std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
  ++r.coordinates;
  if (err > r.max_rel_error || r.worst.empty()) {
    r.max_rel_error = std::max(err, r.max_rel_error);
    r.worst = where;
  }
}

void require_deterministic(const Tape<double>& tape) {
  if (tape.stochastic()) throw UsageError("finite_diff_check: function uses active dropout");
}

}  // namespace

GradCheckResult finite_diff_check(const std::function<Var<double>(Tape<double>&, Var<double>)>& f,
                                  const Tensor<double>& x, double eps) {
  Tensor<double> analytic;
  {
    Tape<double> tape;
    Var<double> xv = tape.variable(x);
    Var<double> y = f(tape, xv);
    require_deterministic(tape);
    tape.backward(y);
    analytic = xv.requires_grad() && tape.has_grad(xv.id) ? tape.grad_of(xv) : Tensor<double>(x.shape());
  }
  auto eval = [&](const Tensor<double>& at) {
    Tape<double> tape;
    return f(tape, tape.constant(at)).value().item();
  };
  GradCheckResult r;
  Tensor<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = eval(probe);
    probe[i] = orig - eps;
    const double down = eval(probe);
    probe[i] = orig;
    note(r, analytic[i], (up - down) / (2 * eps), "x[" + std::to_string(i) + "]");
  }
  return r;
}

GradCheckResult finite_diff_check(const std::function<Var<double>(Tape<double>&)>& loss,
                                  std::span<Parameter<double>* const> params, double eps) {
  for (auto* p : params) p->zero_grad();
  {
    Tape<double> tape;
    Var<double> y = loss(tape);
    require_deterministic(tape);
    tape.backward(y);
  }
  auto eval = [&] {
    Tape<double> tape;
    return loss(tape).value().item();
  };
  GradCheckResult r;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + eps;
      const double up = eval();
      p->value[i] = orig - eps;
      const double down = eval();
      p->value[i] = orig;
      note(r, p->grad[i], (up - down) / (2 * eps), p->name + "[" + std::to_string(i) + "]");
    }
  }
  return r;
}

}  // namespace pasnet
