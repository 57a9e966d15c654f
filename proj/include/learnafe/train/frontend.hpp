#pragma once

// Differentiable analog front-end: bank filtering, rectification and frame
// integration, with the reverse pass into the trainable bank variables.

#include <span>
#include <string>
#include <vector>

#include "learnafe/circuit.hpp"
#include "learnafe/features.hpp"
#include "learnafe/filterbank.hpp"

namespace learnafe::train {

/// Ratio: trainable raw values with phi = 1 + softplus(raw); I_2 and C_1 stay
/// frozen. Direct: I_1, I_2 (nA) and W_C1, W_C2 (um) are trained directly and
/// projected back into the feasible set after each step.
enum class Parameterization { Ratio, Direct };

class LearnableBank {
 public:
  LearnableBank() = default;
  LearnableBank(const circuit::BankParams& init, Parameterization p);

  Parameterization parameterization() const { return kind_; }
  const circuit::PdkConstants& pdk() const { return pdk_; }

  /// Ratio: [raw_phi_i x16, raw_phi_c x16]. Direct: [I1, I2, WC1, WC2] x16.
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Current physical bank.
  circuit::BankParams params() const;

  /// Gradient with respect to values() of
  ///   sum_c <g_c, d(ch_c)> + lambda_i * sum phi_I + lambda_c * sum phi_C,
  /// where g holds loss gradients with respect to each channel's
  /// (phi_I, phi_C, I_2, C_1).
  std::vector<double> gradient(std::span<const filterbank::ChannelGrad> g, double lambda_i,
                               double lambda_c) const;

  /// Direct mode: clamps currents and widths so that phi_I, phi_C > 1.
  void project();

 private:
  Parameterization kind_ = Parameterization::Ratio;
  circuit::PdkConstants pdk_;
  std::vector<double> i2_base_, c1_base_;  // frozen in ratio mode
  std::vector<double> values_;
};

std::string_view parameterization_name(Parameterization p);

/// Per-clip state kept between the forward and reverse pass.
struct FrontendCache {
  filterbank::Spectrum spectrum;
  Array2D<double> filtered;
};

features::SpikeSpectrogram frontend_forward(const circuit::BankParams& bank,
                                            std::span<const double> waveform,
                                            const features::FeatureConfig& cfg,
                                            FrontendCache* cache = nullptr,
                                            Exec exec = Exec::Serial);

/// dspec: gradient of the loss with respect to the spectrogram (16 x F).
std::vector<filterbank::ChannelGrad> frontend_backward(const circuit::BankParams& bank,
                                                       const FrontendCache& cache,
                                                       const Array2D<double>& dspec,
                                                       const features::FeatureConfig& cfg,
                                                       Exec exec = Exec::Serial);

/// Spectrogram through the oversampled biquad (time-domain) path.
features::SpikeSpectrogram transient_features(const circuit::BankParams& bank,
                                              std::span<const double> waveform,
                                              const features::FeatureConfig& cfg,
                                              std::size_t oversample = 8,
                                              Exec exec = Exec::Serial);

}  // namespace learnafe::train
