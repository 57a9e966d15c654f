#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "learnafe/common.hpp"

namespace learnafe::nn {

inline std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

/// Dense row-major tensor; NCHW for feature maps.
template <class T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until ensure_grad()

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, T fill = T{})
      : shape(std::move(s)), data(shape_numel(shape), fill) {}

  std::size_t numel() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T{});
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T{}); }

  void check_shape(const std::vector<std::size_t>& s, const char* what) const {
    if (shape != s) throw DomainError(std::string("shape mismatch for ") + what);
  }
};

/// Trainable tensor with a stable name (used by checkpoints).
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  bool trainable = true;
  bool decay = true;  // subject to weight decay
};

}  // namespace learnafe::nn
