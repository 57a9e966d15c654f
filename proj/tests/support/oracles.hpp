#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's numerics.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

/// O(n^2) DFT, X[k] = sum x[t] e^{-2 pi i k t / n}.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      s += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t % n) / static_cast<double>(n));
    }
    out[k] = s;
  }
  return out;
}

/// Least-squares amplitude of a sinusoid at frequency f over samples [lo, hi).
inline double tone_amplitude(std::span<const double> y, double f, double fs, std::size_t lo,
                             std::size_t hi) {
  double ss = 0, cc = 0, sc = 0, ys = 0, yc = 0;
  for (std::size_t t = lo; t < hi; ++t) {
    const double w = 2.0 * kPi * f * static_cast<double>(t) / fs;
    const double s = std::sin(w), c = std::cos(w);
    ss += s * s;
    cc += c * c;
    sc += s * c;
    ys += y[t] * s;
    yc += y[t] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

/// Central difference of f at x along a scalar step h.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Fourth-order five-point central difference.
inline double central_diff5(const std::function<double(double)>& f, double x, double h) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
}

/// |a - b| / max(|a|, |b|, floor)
inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Second-order bandpass H(s) = -a s / (s^2 + b s + c): resonance, Q and
/// peak gain from the coefficients.
struct Biquad {
  double fc, q, gain;
};
inline Biquad bandpass_from_coefficients(double a, double b, double c) {
  const double w0 = std::sqrt(c);
  return {w0 / (2.0 * kPi), w0 / b, a / b};
}

/// Monte-Carlo estimate of E[max(X - best, 0)], X ~ N(mu, sigma^2), with its
/// standard error.
inline std::pair<double, double> mc_expected_improvement(double mu, double sigma, double best,
                                                         std::size_t samples,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(mu, sigma);
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = std::max(n(rng) - best, 0.0);
    s += v;
    s2 += v * v;
  }
  const double m = s / static_cast<double>(samples);
  const double var = s2 / static_cast<double>(samples) - m * m;
  return {m, std::sqrt(std::max(var, 0.0) / static_cast<double>(samples))};
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

inline std::vector<double> tone(std::size_t n, double f, double fs, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = amp * std::sin(2.0 * kPi * f * static_cast<double>(t) / fs);
  return x;
}

}  // namespace oracle
