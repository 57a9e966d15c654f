#pragma once

#include <span>
#include <vector>

#include "learnafe/common.hpp"
#include "learnafe/nn/tensor.hpp"

namespace learnafe::nn {

/// Per-channel normalization over (batch, spatial) of an N x C x HW block.
template <class T>
struct BatchNormCache {
  std::vector<T> xhat;     // normalized input, same layout as x
  std::vector<T> inv_std;  // per channel
  bool training = false;
};

struct BatchNormConfig {
  double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
  double eps = 1e-7;
};

/// Training mode uses batch statistics (N >= 2 required) and updates the
/// running mean and unbiased running variance; eval mode uses running stats.
template <class T>
void batchnorm_forward(const T* x, std::size_t n, std::size_t c, std::size_t hw, const T* gamma,
                       const T* beta, T* running_mean, T* running_var, bool training,
                       const BatchNormConfig& cfg, T* y, BatchNormCache<T>& cache,
                       Exec exec = Exec::Parallel);

template <class T>
void batchnorm_backward(const T* dy, std::size_t n, std::size_t c, std::size_t hw, const T* gamma,
                        const BatchNormCache<T>& cache, T* dx, T* dgamma, T* dbeta,
                        Exec exec = Exec::Parallel);

/// -log softmax(logits)[label]; grad receives softmax - one_hot.
template <class T>
double softmax_cross_entropy(std::span<const T> logits, int label, std::span<T> grad);

/// Mean loss over the batch; dlogits = (softmax - one_hot) / N.
template <class T>
double softmax_cross_entropy_batch(const Tensor<T>& logits, std::span<const int> labels,
                                   Tensor<T>& dlogits);

std::vector<double> softmax(std::span<const double> logits);

template <class T>
std::size_t argmax(std::span<const T> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace learnafe::nn
