#include "learnafe/dsp/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace learnafe::dsp {

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

PolyphaseResampler::PolyphaseResampler(std::size_t up, std::size_t down,
                                       std::size_t taps_per_phase, double kaiser_beta)
    : up_(up), down_(down) {
  if (up == 0 || down == 0 || taps_per_phase < 2) {
    throw std::invalid_argument("resampler: invalid ratio or tap count");
  }
  const std::size_t g = std::gcd(up, down);
  up_ /= g;
  down_ /= g;
  // Downsampling stretches the kernel so the cutoff tracks the output Nyquist.
  const double cutoff = 0.5 * std::min(1.0, static_cast<double>(up_) / down_);
  const double stretch = 0.5 / cutoff;
  taps_ = static_cast<std::size_t>(std::ceil(taps_per_phase * stretch));
  if (taps_ % 2) ++taps_;
  first_ = -static_cast<std::ptrdiff_t>(taps_ / 2) + 1;
  const double half_width = static_cast<double>(taps_) / 2.0;
  const double i0b = bessel_i0(kaiser_beta);

  table_.assign(up_ * taps_, 0.0);
  for (std::size_t p = 0; p < up_; ++p) {
    const double frac = static_cast<double>(p) / up_;
    double sum = 0.0;
    for (std::size_t k = 0; k < taps_; ++k) {
      // distance between the output instant and input sample floor(t)+first+k
      const double d = frac - static_cast<double>(first_ + static_cast<std::ptrdiff_t>(k));
      const double arg = 2.0 * cutoff * d;
      const double sinc = std::abs(arg) < 1e-12
                              ? 1.0
                              : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      const double r = d / half_width;
      const double win = std::abs(r) >= 1.0 ? 0.0 : bessel_i0(kaiser_beta * std::sqrt(1.0 - r * r)) / i0b;
      const double w = sinc * win;
      table_[p * taps_ + k] = w;
      sum += w;
    }
    for (std::size_t k = 0; k < taps_; ++k) table_[p * taps_ + k] /= sum;
  }
}

std::size_t PolyphaseResampler::output_length(std::size_t n) const {
  return (n * up_ + down_ - 1) / down_;
}

std::vector<double> PolyphaseResampler::process(std::span<const double> x) const {
  const std::size_t n_out = output_length(x.size());
  std::vector<double> y(n_out, 0.0);
  if (x.empty()) return y;
  const auto n_in = static_cast<std::ptrdiff_t>(x.size());
  for (std::size_t m = 0; m < n_out; ++m) {
    const std::size_t num = m * down_;
    const auto base = static_cast<std::ptrdiff_t>(num / up_);
    const std::size_t phase = num % up_;
    const double* w = table_.data() + phase * taps_;
    double acc = 0.0;
    const std::ptrdiff_t start = base + first_;
    if (start >= 0 && start + static_cast<std::ptrdiff_t>(taps_) <= n_in) {
      const double* xs = x.data() + start;
      for (std::size_t k = 0; k < taps_; ++k) acc += w[k] * xs[k];
    } else {
      for (std::size_t k = 0; k < taps_; ++k) {
        const std::ptrdiff_t idx =
            std::clamp<std::ptrdiff_t>(start + static_cast<std::ptrdiff_t>(k), 0, n_in - 1);
        acc += w[k] * x[static_cast<std::size_t>(idx)];
      }
    }
    y[m] = acc;
  }
  return y;
}

}  // namespace learnafe::dsp
