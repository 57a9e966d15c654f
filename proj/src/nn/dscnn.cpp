#include "learnafe/nn/dscnn.hpp"

#include <cmath>
#include <random>

namespace learnafe::nn {

std::size_t DscnnConfig::expected_parameter_count() const {
  const std::size_t c = channels;
  const std::size_t stem = c * stem_kh * stem_kw + c;
  const std::size_t block = c * dw_k * dw_k + c * c + 2 * c;
  return stem + blocks * block + classes * c + classes;
}

template <class T>
Dscnn<T>::Dscnn(const DscnnConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.channels == 0 || cfg_.classes == 0 || cfg_.in_h == 0) {
    throw DomainError("DSCNN dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  auto add = [&](std::string name, std::vector<std::size_t> shape, double bound, bool decay) {
    Parameter<T> p;
    p.name = std::move(name);
    p.value = Tensor<T>(std::move(shape));
    p.decay = decay;
    if (bound > 0) {
      std::uniform_real_distribution<double> u(-bound, bound);
      for (auto& v : p.value.data) v = static_cast<T>(u(rng));
    }
    p.value.ensure_grad();
    params_.push_back(std::move(p));
    return params_.size() - 1;
  };
  const std::size_t c = cfg_.channels;
  // He-uniform for ReLU-fed convolutions, 1/sqrt(fan_in) for the classifier
  const double stem_fan = static_cast<double>(cfg_.stem_kh * cfg_.stem_kw);
  stem_w_ = add("stem.weight", {c, 1, cfg_.stem_kh, cfg_.stem_kw}, std::sqrt(6.0 / stem_fan), true);
  stem_b_ = add("stem.bias", {c}, 0.0, false);
  for (std::size_t b = 0; b < cfg_.blocks; ++b) {
    const std::string pre = "block" + std::to_string(b);
    dw_.push_back(add(pre + ".depthwise", {c, 1, cfg_.dw_k, cfg_.dw_k},
                      std::sqrt(6.0 / static_cast<double>(cfg_.dw_k * cfg_.dw_k)), true));
    pw_.push_back(add(pre + ".pointwise", {c, c, 1, 1}, std::sqrt(6.0 / static_cast<double>(c)), true));
    gamma_.push_back(add(pre + ".bn.gamma", {c}, 0.0, false));
    std::fill(params_.back().value.data.begin(), params_.back().value.data.end(), T{1});
    beta_.push_back(add(pre + ".bn.beta", {c}, 0.0, false));
    running_mean_.emplace_back(c, T{0});
    running_var_.emplace_back(c, T{1});
  }
  fc_w_ = add("fc.weight", {cfg_.classes, c}, 1.0 / std::sqrt(static_cast<double>(c)), true);
  fc_b_ = add("fc.bias", {cfg_.classes}, 0.0, false);
}

template <class T>
Parameter<T>& Dscnn<T>::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw DomainError("no parameter named " + name);
}

template <class T>
const Parameter<T>& Dscnn<T>::parameter(const std::string& name) const {
  return const_cast<Dscnn*>(this)->parameter(name);
}

template <class T>
std::vector<std::pair<std::string, std::vector<T>*>> Dscnn<T>::buffers() {
  std::vector<std::pair<std::string, std::vector<T>*>> out;
  for (std::size_t b = 0; b < cfg_.blocks; ++b) {
    const std::string pre = "block" + std::to_string(b) + ".bn.";
    out.emplace_back(pre + "running_mean", &running_mean_[b]);
    out.emplace_back(pre + "running_var", &running_var_[b]);
  }
  return out;
}

template <class T>
std::size_t Dscnn<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

template <class T>
void Dscnn<T>::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

template <class T>
void Dscnn<T>::set_trainable(bool trainable) {
  for (auto& p : params_) p.trainable = trainable;
}

template <class T>
Tensor<T> Dscnn<T>::forward(const Tensor<T>& x, bool training, Exec exec) {
  if (x.shape.size() != 4 || x.shape[1] != 1 || x.shape[2] != cfg_.in_h) {
    throw DomainError("DSCNN input must be N x 1 x " + std::to_string(cfg_.in_h) + " x F");
  }
  const std::size_t n = x.shape[0], f = x.shape[3];
  if (n == 0) throw DomainError("empty batch");
  if (f < cfg_.stem_kw) throw DomainError("input has fewer frames than the stem kernel width");
  for (T v : x.data) {
    if (!std::isfinite(static_cast<double>(v))) throw DomainError("non-finite DSCNN input");
  }
  const std::size_t c = cfg_.channels;
  cached_ = false;
  input_ = x;

  stem_shape_ = same_conv_shape(n, 1, cfg_.in_h, f, c, cfg_.stem_kh, cfg_.stem_kw, cfg_.stem_sh,
                                cfg_.stem_sw, 1);
  const std::size_t h = stem_shape_.oh, w = stem_shape_.ow;
  stem_act_ = Tensor<T>({n, c, h, w});
  conv2d_forward(stem_shape_, x.data.data(), params_[stem_w_].value.data.data(),
                 params_[stem_b_].value.data.data(), stem_act_.data.data(), exec);
  for (auto& v : stem_act_.data) v = v > T{0} ? v : T{0};

  dw_shape_ = same_conv_shape(n, c, h, w, c, cfg_.dw_k, cfg_.dw_k, 1, 1, c);
  pw_shape_ = same_conv_shape(n, c, h, w, c, 1, 1, 1, 1, 1);
  blocks_.resize(cfg_.blocks);
  const Tensor<T>* in = &stem_act_;
  for (std::size_t b = 0; b < cfg_.blocks; ++b) {
    BlockCache& bc = blocks_[b];
    bc.dw_out = Tensor<T>({n, c, h, w});
    conv2d_forward(dw_shape_, in->data.data(), params_[dw_[b]].value.data.data(), static_cast<const T*>(nullptr),
                   bc.dw_out.data.data(), exec);
    Tensor<T> pw_out({n, c, h, w});
    conv2d_forward(pw_shape_, bc.dw_out.data.data(), params_[pw_[b]].value.data.data(), static_cast<const T*>(nullptr),
                   pw_out.data.data(), exec);
    bc.act = Tensor<T>({n, c, h, w});
    batchnorm_forward(pw_out.data.data(), n, c, h * w, params_[gamma_[b]].value.data.data(),
                      params_[beta_[b]].value.data.data(), running_mean_[b].data(),
                      running_var_[b].data(), training, cfg_.bn, bc.act.data.data(), bc.bn, exec);
    for (auto& v : bc.act.data) v = v > T{0} ? v : T{0};
    in = &bc.act;
  }

  const std::size_t hw = h * w;
  pooled_ = Tensor<T>({n, c});
  for (std::size_t i = 0; i < n * c; ++i) {
    const T* p = in->data.data() + i * hw;
    double s = 0.0;
    for (std::size_t t = 0; t < hw; ++t) s += p[t];
    pooled_.data[i] = static_cast<T>(s / static_cast<double>(hw));
  }

  const std::size_t k = cfg_.classes;
  Tensor<T> logits({n, k});
  const auto& wfc = params_[fc_w_].value.data;
  const auto& bfc = params_[fc_b_].value.data;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      T acc = bfc[j];
      for (std::size_t q = 0; q < c; ++q) acc += wfc[j * c + q] * pooled_.data[i * c + q];
      logits.data[i * k + j] = acc;
    }
  }
  cached_ = true;
  return logits;
}

template <class T>
Tensor<T> Dscnn<T>::backward(const Tensor<T>& dlogits, Exec exec) {
  if (!cached_) throw StateError("backward called without a preceding forward pass");
  const std::size_t n = input_.shape[0], c = cfg_.channels, k = cfg_.classes;
  dlogits.check_shape({n, k}, "logit gradient");
  cached_ = false;
  for (auto& p : params_) p.value.ensure_grad();

  // fully connected
  auto& gw = params_[fc_w_].value.grad;
  auto& gb = params_[fc_b_].value.grad;
  const auto& wfc = params_[fc_w_].value.data;
  std::fill(gw.begin(), gw.end(), T{});
  std::fill(gb.begin(), gb.end(), T{});
  Tensor<T> dpool({n, c});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const T g = dlogits.data[i * k + j];
      gb[j] += g;
      for (std::size_t q = 0; q < c; ++q) {
        gw[j * c + q] += g * pooled_.data[i * c + q];
        dpool.data[i * c + q] += g * wfc[j * c + q];
      }
    }
  }

  const std::size_t h = stem_shape_.oh, w = stem_shape_.ow, hw = h * w;
  Tensor<T> da({n, c, h, w});
  for (std::size_t i = 0; i < n * c; ++i) {
    const T g = static_cast<T>(dpool.data[i] / static_cast<double>(hw));
    std::fill(da.data.begin() + static_cast<std::ptrdiff_t>(i * hw),
              da.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * hw), g);
  }

  Tensor<T> dtmp({n, c, h, w});
  for (std::size_t bb = cfg_.blocks; bb-- > 0;) {
    BlockCache& bc = blocks_[bb];
    for (std::size_t t = 0; t < da.numel(); ++t) {
      if (!(bc.act.data[t] > T{0})) da.data[t] = T{0};
    }
    // da now holds d(bn output); dtmp <- d(pointwise output)
    batchnorm_backward(da.data.data(), n, c, hw, params_[gamma_[bb]].value.data.data(), bc.bn,
                       dtmp.data.data(), params_[gamma_[bb]].value.grad.data(),
                       params_[beta_[bb]].value.grad.data(), exec);
    conv2d_backward_weight(pw_shape_, dtmp.data.data(), bc.dw_out.data.data(),
                           params_[pw_[bb]].value.grad.data(), static_cast<T*>(nullptr), exec);
    conv2d_backward_data(pw_shape_, dtmp.data.data(), params_[pw_[bb]].value.data.data(),
                         da.data.data(), exec);
    // da <- d(depthwise output)
    const Tensor<T>& in = bb == 0 ? stem_act_ : blocks_[bb - 1].act;
    conv2d_backward_weight(dw_shape_, da.data.data(), in.data.data(),
                           params_[dw_[bb]].value.grad.data(), static_cast<T*>(nullptr), exec);
    conv2d_backward_data(dw_shape_, da.data.data(), params_[dw_[bb]].value.data.data(),
                         dtmp.data.data(), exec);
    std::swap(da, dtmp);
  }

  for (std::size_t t = 0; t < da.numel(); ++t) {
    if (!(stem_act_.data[t] > T{0})) da.data[t] = T{0};
  }
  conv2d_backward_weight(stem_shape_, da.data.data(), input_.data.data(),
                         params_[stem_w_].value.grad.data(), params_[stem_b_].value.grad.data(),
                         exec);
  Tensor<T> dx(input_.shape);
  conv2d_backward_data(stem_shape_, da.data.data(), params_[stem_w_].value.data.data(),
                       dx.data.data(), exec);

  for (auto& p : params_) {
    if (!p.trainable) p.value.zero_grad();
  }
  return dx;
}

template class Dscnn<float>;
template class Dscnn<double>;

}  // namespace learnafe::nn
