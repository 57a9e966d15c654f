#include "learnafe/train/frontend.hpp"

#include <algorithm>
#include <cmath>

namespace learnafe::train {

using circuit::BankParams;
using filterbank::ChannelGrad;

namespace {

constexpr double kNano = 1e-9;
constexpr double kMinCurrentNa = 1e-6;
constexpr double kMinWidthUm = 0.05;
constexpr double kMinRatioMargin = 1e-6;

// dC/dW in farads per um
double dcap_dw(double w, const circuit::PdkConstants& pdk) {
  return (2.0 * w * pdk.cap_density + 2.0 * pdk.cap_fringe) * 1e-15;
}

}  // namespace

std::string_view parameterization_name(Parameterization p) {
  return p == Parameterization::Ratio ? "ratio" : "direct";
}

LearnableBank::LearnableBank(const BankParams& init, Parameterization p)
    : kind_(p), pdk_(init.pdk) {
  init.validate();
  const std::size_t n = init.channels.size();
  for (const auto& ch : init.channels) {
    i2_base_.push_back(ch.i2_base);
    c1_base_.push_back(ch.c1_base);
  }
  if (p == Parameterization::Ratio) {
    values_.resize(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      values_[k] = circuit::raw_from_phi(init.channels[k].phi_i);
      values_[n + k] = circuit::raw_from_phi(init.channels[k].phi_c);
    }
  } else {
    values_.resize(4 * n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& ch = init.channels[k];
      values_[k] = ch.phi_i * ch.i2_base / kNano;
      values_[n + k] = ch.i2_base / kNano;
      values_[2 * n + k] = circuit::width_for_capacitance(ch.c1_base, pdk_).w_c;
      values_[3 * n + k] = circuit::width_for_capacitance(ch.phi_c * ch.c1_base, pdk_).w_c;
    }
  }
}

BankParams LearnableBank::params() const {
  BankParams b;
  b.pdk = pdk_;
  const std::size_t n = i2_base_.size();
  for (std::size_t k = 0; k < n; ++k) {
    circuit::ChannelParams ch;
    if (kind_ == Parameterization::Ratio) {
      ch.i2_base = i2_base_[k];
      ch.c1_base = c1_base_[k];
      ch.phi_i = circuit::phi_from_raw(values_[k]);
      ch.phi_c = circuit::phi_from_raw(values_[n + k]);
    } else {
      const double i1 = values_[k] * kNano, i2 = values_[n + k] * kNano;
      const double c1 = circuit::capacitance_of({values_[2 * n + k]}, pdk_);
      const double c2 = circuit::capacitance_of({values_[3 * n + k]}, pdk_);
      ch.i2_base = i2;
      ch.c1_base = c1;
      ch.phi_i = i1 / i2;
      ch.phi_c = c2 / c1;
    }
    b.channels.push_back(ch);
  }
  return b;
}

std::vector<double> LearnableBank::gradient(std::span<const ChannelGrad> g, double lambda_i,
                                            double lambda_c) const {
  const std::size_t n = i2_base_.size();
  if (g.size() != n) throw DomainError("gradient must have one entry per channel");
  std::vector<double> out(values_.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double gi = g[k].phi_i + lambda_i;
    const double gc = g[k].phi_c + lambda_c;
    if (kind_ == Parameterization::Ratio) {
      out[k] = gi * circuit::dphi_draw(values_[k]);
      out[n + k] = gc * circuit::dphi_draw(values_[n + k]);
    } else {
      const double i1 = values_[k], i2 = values_[n + k];  // nA
      const double w1 = values_[2 * n + k], w2 = values_[3 * n + k];
      const double c1 = circuit::capacitance_of({w1}, pdk_);
      const double c2 = circuit::capacitance_of({w2}, pdk_);
      // phi_I = I1/I2, I_2 = I2 * 1e-9
      out[k] = gi / i2;
      out[n + k] = -gi * i1 / (i2 * i2) + g[k].i2 * kNano;
      // C_1 = C(W1), phi_C = C(W2)/C(W1)
      const double dc1 = dcap_dw(w1, pdk_), dc2 = dcap_dw(w2, pdk_);
      out[2 * n + k] = g[k].c1 * dc1 - gc * c2 * dc1 / (c1 * c1);
      out[3 * n + k] = gc * dc2 / c1;
    }
  }
  return out;
}

void LearnableBank::project() {
  if (kind_ != Parameterization::Direct) return;
  const std::size_t n = i2_base_.size();
  for (std::size_t k = 0; k < n; ++k) {
    double& i1 = values_[k];
    double& i2 = values_[n + k];
    double& w1 = values_[2 * n + k];
    double& w2 = values_[3 * n + k];
    i2 = std::max(i2, kMinCurrentNa);
    i1 = std::max(i1, i2 * (1.0 + kMinRatioMargin));
    w1 = std::max(w1, kMinWidthUm);
    w2 = std::max(w2, w1 * (1.0 + kMinRatioMargin));
  }
}

features::SpikeSpectrogram frontend_forward(const BankParams& bank,
                                            std::span<const double> waveform,
                                            const features::FeatureConfig& cfg,
                                            FrontendCache* cache, Exec exec) {
  if (!cache) {
    return features::spectrogram(filterbank::apply_ideal(bank, waveform, kSampleRate, exec), cfg);
  }
  for (const auto& ch : bank.channels) ch.validate();
  cache->spectrum = filterbank::analyze(waveform);
  cache->filtered = Array2D<double>(bank.channels.size(), waveform.size());
  const auto nch = static_cast<std::ptrdiff_t>(bank.channels.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t c = 0; c < nch; ++c) {
    filterbank::filter_channel(bank.channels[c], bank.pdk, cache->spectrum, kSampleRate,
                               cache->filtered.row(c));
  }
  return features::spectrogram(cache->filtered, cfg);
}

std::vector<ChannelGrad> frontend_backward(const BankParams& bank, const FrontendCache& cache,
                                           const Array2D<double>& dspec,
                                           const features::FeatureConfig& cfg, Exec exec) {
  const Array2D<double> dfiltered = features::grad_spectrogram(cache.filtered, dspec, cfg);
  std::vector<ChannelGrad> grads(bank.channels.size());
  const auto nch = static_cast<std::ptrdiff_t>(bank.channels.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t c = 0; c < nch; ++c) {
    grads[c] = filterbank::grad_channel(bank.channels[c], bank.pdk, cache.spectrum, kSampleRate,
                                        dfiltered.row(c));
  }
  return grads;
}

features::SpikeSpectrogram transient_features(const BankParams& bank,
                                              std::span<const double> waveform,
                                              const features::FeatureConfig& cfg,
                                              std::size_t oversample, Exec exec) {
  return features::spectrogram(
      filterbank::simulate_transient_bank(bank, waveform, kSampleRate, oversample, exec), cfg);
}

}  // namespace learnafe::train
