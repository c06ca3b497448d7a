#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "pasnet/tensor.hpp"

namespace pasnet {

// A learned tensor. `grad` accumulates across backward passes until
// zero_grad() is called.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
class Tape;

// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const { return tape->requires_grad(id); }
};

// Reverse-mode tape. Records are appended in evaluation order, so the
// record list is always topologically sorted and backward() replays it
// back to front.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  // With grad disabled, parameters enter as constants and nothing is
  // recorded for backward (inference).
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value);
  // Leaf that receives a gradient, readable through grad().
  Var<T> variable(Tensor<T> value);
  // Leaf aliasing a parameter; its gradient is accumulated into p.grad.
  Var<T> parameter(Parameter<T>& p);

  Var<T> record(const char* op, std::span<const Var<T>> inputs, Tensor<T> value, BackwardFn backward);
  Var<T> record(const char* op, std::initializer_list<Var<T>> inputs, Tensor<T> value, BackwardFn backward) {
    return record(op, std::span<const Var<T>>(inputs.begin(), inputs.size()), std::move(value),
                  std::move(backward));
  }

  void backward(Var<T> root);

  const Tensor<T>& value(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  const char* op_name(std::uint32_t id) const { return nodes_[id].op; }
  std::span<const std::uint32_t> inputs(std::uint32_t id) const { return nodes_[id].inputs; }

  // Gradient buffer of a node, allocated on first use. Parameters return
  // their own accumulator.
  Tensor<T>& grad(std::uint32_t id);
  // Gradient buffer of an input, or nullptr when it does not need one.
  Tensor<T>* input_grad(std::uint32_t id) { return requires_grad(id) ? &grad(id) : nullptr; }
  bool has_grad(std::uint32_t id) const { return nodes_[id].param != nullptr || nodes_[id].grad_live; }
  const Tensor<T>& grad_of(Var<T> v) const;

  // Set by ops whose output depends on random draws (active dropout).
  void mark_stochastic() { stochastic_ = true; }
  bool stochastic() const { return stochastic_; }

  std::size_t size() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

 private:
  struct Node {
    const char* op = "";
    std::vector<std::uint32_t> inputs;
    Tensor<T> value;
    Tensor<T> grad;
    bool grad_live = false;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  Var<T> push(Node node);

  std::vector<Node> nodes_;
  bool grad_enabled_;
  bool stochastic_ = false;
};

}  // namespace pasnet
