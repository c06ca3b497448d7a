#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pasnet/autograd.hpp"
#include "pasnet/rng.hpp"

namespace pasnet {

// Named parameters in creation order. Addresses are stable for the life of
// the store, so tapes may hold pointers into it.
template <typename T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  Parameter<T>& add(const std::string& name, Shape shape);
  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }
  std::vector<Parameter<T>*> all();

  void zero_grad();
  std::size_t scalar_count() const;
  // Copies values from another store with identical names and shapes.
  void copy_values_from(const ParamStore& other);

  std::vector<Tensor<T>> snapshot() const;
  void restore(const std::vector<Tensor<T>>& values);

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

// Glorot-uniform for matrices, zero for vectors.
template <typename T>
void init_glorot(Parameter<T>& p, Rng& rng);
template <typename T>
void init_uniform(Parameter<T>& p, double bound, Rng& rng);

}  // namespace pasnet
