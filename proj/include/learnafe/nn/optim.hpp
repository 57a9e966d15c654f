#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "learnafe/common.hpp"

namespace learnafe::nn {

enum class DecayKind { L2, L1 };

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
  DecayKind decay_kind = DecayKind::L2;
};

/// One trainable buffer as seen by the optimizer.
template <class T>
struct ParamRef {
  std::span<T> value;
  std::span<const T> grad;
  bool decay = true;
  bool trainable = true;  // frozen entries keep their slot but are skipped
};

/// Adam with decoupled weight decay. In L2 mode decay shrinks each decayed
/// weight by lr * wd * w per step, in L1 mode by lr * wd * sign(w).
/// Moment slots are bound to parameters by position.
template <class T>
class AdamW {
 public:
  explicit AdamW(AdamConfig cfg = {}) : cfg_(cfg) {}

  AdamConfig& config() { return cfg_; }
  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return t_; }

  void step(const std::vector<ParamRef<T>>& params) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.value.size(), 0.0);
        v_.emplace_back(p.value.size(), 0.0);
      }
    }
    if (m_.size() != params.size()) throw StateError("optimizer bound to a different parameter set");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = params[i];
      if (!p.trainable) continue;
      if (p.grad.size() != p.value.size() || m_[i].size() != p.value.size()) {
        throw StateError("parameter size changed under the optimizer");
      }
      for (std::size_t j = 0; j < p.value.size(); ++j) {
        const double g = p.grad[j];
        double& m = m_[i][j];
        double& v = v_[i][j];
        m = cfg_.beta1 * m + (1 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1 - cfg_.beta2) * g * g;
        double w = p.value[j];
        if (p.decay && cfg_.weight_decay > 0) {
          const double shrink = cfg_.decay_kind == DecayKind::L2 ? w : (w > 0) - (w < 0);
          w -= cfg_.lr * cfg_.weight_decay * shrink;
        }
        w -= cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
        p.value[j] = static_cast<T>(w);
      }
    }
  }

  // State access for checkpoints.
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace learnafe::nn
