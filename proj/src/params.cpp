#include "pasnet/params.hpp"

#include <cmath>

namespace pasnet {

template <typename T>
Parameter<T>& ParamStore<T>::add(const std::string& name, Shape shape) {
  if (find(name)) throw UsageError("duplicate parameter name " + name);
  params_.push_back(std::make_unique<Parameter<T>>(name, Tensor<T>(std::move(shape))));
  return *params_.back();
}

template <typename T>
Parameter<T>* ParamStore<T>::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

template <typename T>
const Parameter<T>* ParamStore<T>::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

template <typename T>
std::vector<Parameter<T>*> ParamStore<T>::all() {
  std::vector<Parameter<T>*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
void ParamStore<T>::copy_values_from(const ParamStore& other) {
  if (other.size() != size()) throw UsageError("parameter stores differ in size");
  for (std::size_t i = 0; i < size(); ++i) {
    if (other[i].name != params_[i]->name || other[i].value.shape() != params_[i]->value.shape()) {
      throw UsageError("parameter stores differ at " + params_[i]->name);
    }
    params_[i]->value = other[i].value;
  }
}

template <typename T>
std::vector<Tensor<T>> ParamStore<T>::snapshot() const {
  std::vector<Tensor<T>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

template <typename T>
void ParamStore<T>::restore(const std::vector<Tensor<T>>& values) {
  if (values.size() != params_.size()) throw UsageError("snapshot does not match the parameter store");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].shape() != params_[i]->value.shape()) throw UsageError("snapshot shape differs at " + params_[i]->name);
    params_[i]->value = values[i];
  }
}

template <typename T>
void init_uniform(Parameter<T>& p, double bound, Rng& rng) {
  for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void init_glorot(Parameter<T>& p, Rng& rng) {
  if (p.value.rank() < 2) {
    p.value.fill(T(0));
    return;
  }
  const double fan_out = static_cast<double>(p.value.dim(0));
  const double fan_in = static_cast<double>(p.value.dim(1));
  init_uniform(p, std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

template class ParamStore<float>;
template class ParamStore<double>;
template void init_glorot<float>(Parameter<float>&, Rng&);
template void init_glorot<double>(Parameter<double>&, Rng&);
template void init_uniform<float>(Parameter<float>&, double, Rng&);
template void init_uniform<double>(Parameter<double>&, double, Rng&);

}  // namespace pasnet
