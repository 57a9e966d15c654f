#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace learnafe::dsp {

/// Rational L/M polyphase resampler with a Kaiser-windowed sinc kernel.
///
/// Output sample m sits at input time m*M/L, so the resampled signal carries no
/// group delay. Samples outside the input are taken as the nearest edge value.
/// Every phase is normalized to unit DC gain.
class PolyphaseResampler {
 public:
  PolyphaseResampler(std::size_t up, std::size_t down, std::size_t taps_per_phase = 64,
                     double kaiser_beta = 8.0);

  std::size_t up() const { return up_; }
  std::size_t down() const { return down_; }

  /// ceil(n * L / M)
  std::size_t output_length(std::size_t n) const;

  std::vector<double> process(std::span<const double> x) const;

 private:
  std::size_t up_;
  std::size_t down_;
  std::size_t taps_;       // taps per phase
  std::ptrdiff_t first_;   // offset of the first tap relative to floor(t)
  std::vector<double> table_;  // up_ rows of taps_ weights
};

/// Zeroth-order modified Bessel function of the first kind.
double bessel_i0(double x);

}  // namespace learnafe::dsp
