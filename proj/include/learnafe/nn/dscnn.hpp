#pragma once

// Depthwise-separable CNN classifier over 1 x 16 x F spike-count spectrograms:
//   stem conv (kh x kw, stride sh x sw, bias) -> ReLU
//   blocks x [depthwise k x k -> pointwise 1x1 -> batch norm -> ReLU]
//   global average pool -> fully connected.
// All convolutions use "same" padding.

#include <cstdint>
#include <string>
#include <vector>

#include "learnafe/common.hpp"
#include "learnafe/nn/kernels.hpp"
#include "learnafe/nn/layers.hpp"
#include "learnafe/nn/tensor.hpp"

namespace learnafe::nn {

struct DscnnConfig {
  std::size_t in_h = kNumChannels;
  std::size_t channels = 64;
  std::size_t blocks = 4;
  std::size_t stem_kh = 4, stem_kw = 10;
  std::size_t stem_sh = 1, stem_sw = 2;
  std::size_t dw_k = 3;
  std::size_t classes = kNumClasses;
  BatchNormConfig bn;

  /// Parameter count implied by the dimensions.
  std::size_t expected_parameter_count() const;
};

template <class T>
class Dscnn {
 public:
  explicit Dscnn(const DscnnConfig& cfg = {}, std::uint64_t seed = 0);

  const DscnnConfig& config() const { return cfg_; }

  /// x: N x 1 x in_h x F. Returns N x classes logits and caches activations.
  Tensor<T> forward(const Tensor<T>& x, bool training, Exec exec = Exec::Parallel);

  /// Consumes the cached forward pass. Overwrites every parameter gradient
  /// (frozen parameters get zeros) and returns the input gradient.
  Tensor<T> backward(const Tensor<T>& dlogits, Exec exec = Exec::Parallel);

  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }
  Parameter<T>& parameter(const std::string& name);
  const Parameter<T>& parameter(const std::string& name) const;

  /// Batch-norm running statistics, named "block{i}.bn.running_mean|var".
  std::vector<std::pair<std::string, std::vector<T>*>> buffers();

  std::size_t parameter_count() const;
  void zero_grad();
  void set_trainable(bool trainable);

 private:
  struct BlockCache {
    Tensor<T> dw_out;
    Tensor<T> act;
    BatchNormCache<T> bn;
  };

  DscnnConfig cfg_;
  std::vector<Parameter<T>> params_;
  std::vector<std::vector<T>> running_mean_, running_var_;

  // indices into params_
  std::size_t stem_w_ = 0, stem_b_ = 0, fc_w_ = 0, fc_b_ = 0;
  std::vector<std::size_t> dw_, pw_, gamma_, beta_;

  // forward cache
  bool cached_ = false;
  Tensor<T> input_;
  Tensor<T> stem_act_;
  std::vector<BlockCache> blocks_;
  Tensor<T> pooled_;
  ConvShape stem_shape_, dw_shape_, pw_shape_;
};

extern template class Dscnn<float>;
extern template class Dscnn<double>;

}  // namespace learnafe::nn
