#include "pasnet/autograd.hpp"

#include <numeric>
#include <sstream>

namespace pasnet {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
Var<T> Tape<T>::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var<T>{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
Var<T> Tape<T>::variable(Tensor<T> value) {
  Node n;
  n.op = "variable";
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

template <typename T>
Var<T> Tape<T>::parameter(Parameter<T>& p) {
  Node n;
  n.op = "parameter";
  n.param = &p;
  n.requires_grad = grad_enabled_;
  return push(std::move(n));
}

template <typename T>
Var<T> Tape<T>::record(const char* op, std::span<const Var<T>> inputs, Tensor<T> value,
                       BackwardFn backward) {
  Node n;
  n.op = op;
  n.inputs.reserve(inputs.size());
  for (const auto& v : inputs) {
    if (v.tape != this) throw UsageError(std::string(op) + ": input belongs to a different tape");
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  n.value = std::move(value);
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

template <typename T>
Tensor<T>& Tape<T>::grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (!n.grad_live) {
    n.grad = Tensor<T>(n.value.shape());
    n.grad_live = true;
  }
  return n.grad;
}

template <typename T>
const Tensor<T>& Tape<T>::grad_of(Var<T> v) const {
  const Node& n = nodes_[v.id];
  if (n.param) return n.param->grad;
  if (!n.grad_live) throw UsageError("no gradient recorded for node " + std::to_string(v.id));
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> root) {
  if (root.tape != this) throw UsageError("backward: root belongs to a different tape");
  if (value(root.id).size() != 1) {
    throw UsageError("backward: root must be a scalar, got shape " + shape_string(value(root.id).shape()));
  }
  for (auto& n : nodes_) {
    if (!n.param && n.grad_live) {
      n.grad = Tensor<T>();
      n.grad_live = false;
    }
  }
  if (!nodes_[root.id].requires_grad) return;
  grad(root.id)[0] += T(1);
  for (std::int64_t id = root.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward && n.grad_live) n.backward(*this, static_cast<std::uint32_t>(id));
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace pasnet
