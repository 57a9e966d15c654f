#include "learnafe/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace learnafe::nn {

template <class T>
void batchnorm_forward(const T* x, std::size_t n, std::size_t c, std::size_t hw, const T* gamma,
                       const T* beta, T* running_mean, T* running_var, bool training,
                       const BatchNormConfig& cfg, T* y, BatchNormCache<T>& cache, Exec exec) {
  if (training && n < 2) throw DomainError("batch norm in training mode needs batch size >= 2");
  cache.training = training;
  cache.xhat.resize(n * c * hw);
  cache.inv_std.resize(c);
  const auto cc = static_cast<std::ptrdiff_t>(c);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t k = 0; k < cc; ++k) {
    const auto ch = static_cast<std::size_t>(k);
    double mean, var;
    if (training) {
      const double m = static_cast<double>(n * hw);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const T* p = x + (i * c + ch) * hw;
        for (std::size_t t = 0; t < hw; ++t) s += p[t];
      }
      mean = s / m;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const T* p = x + (i * c + ch) * hw;
        for (std::size_t t = 0; t < hw; ++t) {
          const double d = p[t] - mean;
          ss += d * d;
        }
      }
      var = ss / m;
      const double unbiased = m > 1 ? ss / (m - 1) : var;
      running_mean[ch] = static_cast<T>(cfg.momentum * running_mean[ch] + (1 - cfg.momentum) * mean);
      running_var[ch] = static_cast<T>(cfg.momentum * running_var[ch] + (1 - cfg.momentum) * unbiased);
    } else {
      mean = running_mean[ch];
      var = running_var[ch];
    }
    const double inv = 1.0 / std::sqrt(var + cfg.eps);
    cache.inv_std[ch] = static_cast<T>(inv);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t t = 0; t < hw; ++t) {
        const T xh = static_cast<T>((x[off + t] - mean) * inv);
        cache.xhat[off + t] = xh;
        y[off + t] = gamma[ch] * xh + beta[ch];
      }
    }
  }
}

template <class T>
void batchnorm_backward(const T* dy, std::size_t n, std::size_t c, std::size_t hw, const T* gamma,
                        const BatchNormCache<T>& cache, T* dx, T* dgamma, T* dbeta, Exec exec) {
  const auto cc = static_cast<std::ptrdiff_t>(c);
  const double m = static_cast<double>(n * hw);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t k = 0; k < cc; ++k) {
    const auto ch = static_cast<std::size_t>(k);
    double sdy = 0.0, sdyx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t t = 0; t < hw; ++t) {
        sdy += dy[off + t];
        sdyx += static_cast<double>(dy[off + t]) * cache.xhat[off + t];
      }
    }
    dgamma[ch] = static_cast<T>(sdyx);
    dbeta[ch] = static_cast<T>(sdy);
    const double g = gamma[ch], inv = cache.inv_std[ch];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t t = 0; t < hw; ++t) {
        if (cache.training) {
          dx[off + t] = static_cast<T>(g * inv / m *
                                       (m * dy[off + t] - sdy - cache.xhat[off + t] * sdyx));
        } else {
          dx[off + t] = static_cast<T>(g * inv * dy[off + t]);
        }
      }
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  for (auto& v : p) v /= z;
  return p;
}

template <class T>
double softmax_cross_entropy(std::span<const T> logits, int label, std::span<T> grad) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw DomainError("label out of range");
  }
  if (grad.size() != logits.size()) throw DomainError("gradient buffer size mismatch");
  const double mx = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  double z = 0.0;
  for (T v : logits) z += std::exp(static_cast<double>(v) - mx);
  const double log_z = std::log(z) + mx;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = std::exp(static_cast<double>(logits[i]) - log_z);
    grad[i] = static_cast<T>(p - (static_cast<int>(i) == label ? 1.0 : 0.0));
  }
  return log_z - static_cast<double>(logits[static_cast<std::size_t>(label)]);
}

template <class T>
double softmax_cross_entropy_batch(const Tensor<T>& logits, std::span<const int> labels,
                                   Tensor<T>& dlogits) {
  if (logits.shape.size() != 2 || logits.shape[0] != labels.size()) {
    throw DomainError("logits must be N x classes with one label per row");
  }
  const std::size_t n = logits.shape[0], k = logits.shape[1];
  dlogits = Tensor<T>(logits.shape);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const T> row(logits.data.data() + i * k, k);
    std::span<T> g(dlogits.data.data() + i * k, k);
    total += softmax_cross_entropy<T>(row, labels[i], g);
    for (auto& v : g) v = static_cast<T>(v / static_cast<double>(n));
  }
  return total / static_cast<double>(n);
}

#define LEARNAFE_INSTANTIATE(T)                                                                    \
  template void batchnorm_forward<T>(const T*, std::size_t, std::size_t, std::size_t, const T*,   \
                                     const T*, T*, T*, bool, const BatchNormConfig&, T*,          \
                                     BatchNormCache<T>&, Exec);                                   \
  template void batchnorm_backward<T>(const T*, std::size_t, std::size_t, std::size_t, const T*,  \
                                      const BatchNormCache<T>&, T*, T*, T*, Exec);                \
  template double softmax_cross_entropy<T>(std::span<const T>, int, std::span<T>);               \
  template double softmax_cross_entropy_batch<T>(const Tensor<T>&, std::span<const int>,         \
                                                 Tensor<T>&);

LEARNAFE_INSTANTIATE(float)
LEARNAFE_INSTANTIATE(double)

#undef LEARNAFE_INSTANTIATE

}  // namespace learnafe::nn
