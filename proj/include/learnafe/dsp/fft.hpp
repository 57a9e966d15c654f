#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace learnafe::dsp {

/// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

/// Real-to-complex transform of length n (n/2 + 1 bins). Thread-safe.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);

/// Inverse of rfft including the 1/n factor. The imaginary parts of the DC and
/// Nyquist bins are ignored. Thread-safe.
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

}  // namespace learnafe::dsp
