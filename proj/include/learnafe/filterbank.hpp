#pragma once

// Second-order bandpass filterbank: analytic transfer function, FFT-domain
// filtering with exact parameter gradients, and a discrete-time parity path.

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "learnafe/circuit.hpp"
#include "learnafe/common.hpp"

namespace learnafe::filterbank {

using Complex = std::complex<double>;
using circuit::BankParams;
using circuit::ChannelParams;
using circuit::PdkConstants;

/// H(j 2 pi f) of one channel.
Complex transfer_at(const ChannelParams& ch, double f, const PdkConstants& pdk);

/// Partial derivatives of H(j 2 pi f) with respect to the channel quantities.
struct TransferPartials {
  Complex h;
  Complex d_phi_i;
  Complex d_phi_c;
  Complex d_i2;
  Complex d_c1;
};
TransferPartials transfer_partials(const ChannelParams& ch, double f, const PdkConstants& pdk);

struct AcResponseTable {
  std::vector<double> frequencies;  // Hz, strictly increasing
  Array2D<double> gains_db;         // channels x grid
  Array2D<double> phases;           // channels x grid, radians
};

AcResponseTable ac_response(const BankParams& bank, double f_lo, double f_hi,
                            std::size_t points_per_decade);

/// Header: freq_hz,ch01_db,...,ch16_db
void write_ac_csv(const AcResponseTable& table, std::ostream& out);

/// Half-spectrum of a zero-padded waveform; the FFT length is the next power
/// of two >= the waveform length. Circular wrap-around at the clip edges is
/// accepted because clips are padded with silence.
struct Spectrum {
  std::size_t length = 0;
  std::size_t fft_len = 0;
  std::vector<Complex> bins;  // fft_len/2 + 1
};

Spectrum analyze(std::span<const double> waveform);

/// Filters one channel; out.size() must equal spectrum.length.
void filter_channel(const ChannelParams& ch, const PdkConstants& pdk, const Spectrum& spectrum,
                    double fs, std::span<double> out);

/// Gradient of <upstream, filtered output> with respect to each channel
/// quantity. Only phi_i and phi_c are trained in the ratio parameterization.
struct ChannelGrad {
  double phi_i = 0.0;
  double phi_c = 0.0;
  double i2 = 0.0;
  double c1 = 0.0;

  ChannelGrad& operator+=(const ChannelGrad& o) {
    phi_i += o.phi_i;
    phi_c += o.phi_c;
    i2 += o.i2;
    c1 += o.c1;
    return *this;
  }
};

ChannelGrad grad_channel(const ChannelParams& ch, const PdkConstants& pdk,
                         const Spectrum& spectrum, double fs, std::span<const double> upstream);

/// Filters a waveform through every channel (channels x samples).
Array2D<double> apply_ideal(const BankParams& bank, std::span<const double> waveform,
                            double fs = kSampleRate, Exec exec = Exec::Parallel);

/// Reverse-mode gradient of apply_ideal; upstream has the output's shape.
std::vector<ChannelGrad> grad_apply_ideal(const BankParams& bank,
                                          std::span<const double> waveform,
                                          const Array2D<double>& upstream,
                                          double fs = kSampleRate, Exec exec = Exec::Parallel);

struct BiquadCoeffs {
  double b0 = 0, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;  // a0 == 1
  double fs = 0;
};

/// Bilinear transform of the channel, prewarped at its center frequency.
BiquadCoeffs discretize_biquad(const ChannelParams& ch, const PdkConstants& pdk, double fs);

/// Transposed direct-form II recurrence from zero initial state.
std::vector<double> filter_biquad(const BiquadCoeffs& c, std::span<const double> waveform);

Complex biquad_response(const BiquadCoeffs& c, double f);

/// Time-domain channel simulation: the input is band-limited interpolated by
/// `oversample`, run through the biquad discretized at the raised rate, and
/// sampled back at fs.
std::vector<double> simulate_transient(const ChannelParams& ch, const PdkConstants& pdk,
                                       std::span<const double> waveform, double fs,
                                       std::size_t oversample = 8);

Array2D<double> simulate_transient_bank(const BankParams& bank, std::span<const double> waveform,
                                        double fs = kSampleRate, std::size_t oversample = 8,
                                        Exec exec = Exec::Parallel);

}  // namespace learnafe::filterbank
