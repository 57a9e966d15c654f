#include "learnafe/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "learnafe/dsp/fft.hpp"
#include "learnafe/dsp/resampler.hpp"

namespace learnafe::filterbank {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// H(s) = -a s / (s^2 + b s + c)
struct Section {
  double a, b, c;
};

Section section_of(const ChannelParams& ch, const PdkConstants& pdk) {
  const auto v = circuit::circuit_values(ch, pdk);
  return {v.gm1 / (2.0 * v.c1), v.gm1 / (2.0 * v.c2), v.gm1 * v.gm2 / (4.0 * v.c1 * v.c2)};
}

inline Complex eval(const Section& sec, double f) {
  const Complex s(0.0, kTwoPi * f);
  return -sec.a * s / (s * s + sec.b * s + sec.c);
}

void check_upstream(const Spectrum& spectrum, std::span<const double> upstream) {
  if (upstream.size() != spectrum.length) {
    throw DomainError("upstream gradient length does not match the waveform");
  }
}

TransferPartials partials(const Section& sec, const ChannelParams& ch, double f) {
  const Complex s(0.0, kTwoPi * f);
  const Complex d = s * s + sec.b * s + sec.c;
  TransferPartials p;
  p.h = -sec.a * s / d;
  p.d_phi_i = -p.h * (sec.c / (ch.phi_i - 1.0)) / d;
  p.d_phi_c = p.h * (sec.b * s + sec.c) / (ch.phi_c * d);
  const Complex shape = 1.0 - (sec.b * s + 2.0 * sec.c) / d;
  p.d_i2 = p.h * shape / ch.i2_base;
  p.d_c1 = -p.h * shape / ch.c1_base;
  return p;
}

void validate_all(const BankParams& bank) {
  bank.pdk.validate();
  for (const auto& ch : bank.channels) ch.validate();
}

}  // namespace

Complex transfer_at(const ChannelParams& ch, double f, const PdkConstants& pdk) {
  if (f < 0) throw DomainError("frequency must be non-negative");
  return eval(section_of(ch, pdk), f);
}

TransferPartials transfer_partials(const ChannelParams& ch, double f, const PdkConstants& pdk) {
  return partials(section_of(ch, pdk), ch, f);
}

AcResponseTable ac_response(const BankParams& bank, double f_lo, double f_hi,
                            std::size_t points_per_decade) {
  if (!(f_lo > 0) || !(f_hi > f_lo)) throw DomainError("need 0 < f_lo < f_hi");
  if (points_per_decade == 0) throw DomainError("points_per_decade must be positive");
  const double decades = std::log10(f_hi / f_lo);
  const auto n = static_cast<std::size_t>(std::floor(decades * points_per_decade + 1e-9)) + 1;
  AcResponseTable t;
  t.frequencies.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.frequencies[i] =
        f_lo * std::pow(10.0, static_cast<double>(i) / static_cast<double>(points_per_decade));
  }
  const std::size_t nch = bank.channels.size();
  t.gains_db = Array2D<double>(nch, n);
  t.phases = Array2D<double>(nch, n);
  for (std::size_t c = 0; c < nch; ++c) {
    const Section sec = section_of(bank.channels[c], bank.pdk);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex h = eval(sec, t.frequencies[i]);
      t.gains_db(c, i) = 20.0 * std::log10(std::abs(h));
      t.phases(c, i) = std::arg(h);
    }
  }
  return t;
}

void write_ac_csv(const AcResponseTable& table, std::ostream& out) {
  out << "freq_hz";
  for (std::size_t c = 0; c < table.gains_db.rows(); ++c) {
    out << ",ch" << (c < 9 ? "0" : "") << (c + 1) << "_db";
  }
  out << '\n';
  const auto old = out.precision(10);
  for (std::size_t i = 0; i < table.frequencies.size(); ++i) {
    out << table.frequencies[i];
    for (std::size_t c = 0; c < table.gains_db.rows(); ++c) out << ',' << table.gains_db(c, i);
    out << '\n';
  }
  out.precision(old);
}

Spectrum analyze(std::span<const double> waveform) {
  if (waveform.empty()) throw DomainError("waveform is empty");
  Spectrum s;
  s.length = waveform.size();
  s.fft_len = dsp::next_pow2(waveform.size());
  std::vector<double> padded(s.fft_len, 0.0);
  std::copy(waveform.begin(), waveform.end(), padded.begin());
  s.bins.resize(s.fft_len / 2 + 1);
  dsp::rfft(padded, s.bins);
  return s;
}

void filter_channel(const ChannelParams& ch, const PdkConstants& pdk, const Spectrum& spectrum,
                    double fs, std::span<double> out) {
  if (out.size() != spectrum.length) throw DomainError("output length mismatch");
  const Section sec = section_of(ch, pdk);
  const double df = fs / static_cast<double>(spectrum.fft_len);
  std::vector<Complex> y(spectrum.bins.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] = spectrum.bins[k] * eval(sec, static_cast<double>(k) * df);
  }
  std::vector<double> full(spectrum.fft_len);
  dsp::irfft(y, full);
  std::copy_n(full.begin(), out.size(), out.begin());
}

ChannelGrad grad_channel(const ChannelParams& ch, const PdkConstants& pdk,
                         const Spectrum& spectrum, double fs, std::span<const double> upstream) {
  check_upstream(spectrum, upstream);
  const std::size_t n = spectrum.fft_len;
  std::vector<double> padded(n, 0.0);
  std::copy(upstream.begin(), upstream.end(), padded.begin());
  std::vector<Complex> g(n / 2 + 1);
  dsp::rfft(padded, g);

  // <u, irfft(Z)> = (1/n) Re sum_k w_k conj(U_k) Z_k, with w = 1 at DC and
  // Nyquist and 2 elsewhere.
  const Section sec = section_of(ch, pdk);
  const double df = fs / static_cast<double>(n);
  ChannelGrad out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
    const TransferPartials p = partials(sec, ch, static_cast<double>(k) * df);
    const Complex cx = std::conj(g[k]) * spectrum.bins[k] * w;
    out.phi_i += (cx * p.d_phi_i).real();
    out.phi_c += (cx * p.d_phi_c).real();
    out.i2 += (cx * p.d_i2).real();
    out.c1 += (cx * p.d_c1).real();
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.phi_i *= inv;
  out.phi_c *= inv;
  out.i2 *= inv;
  out.c1 *= inv;
  return out;
}

Array2D<double> apply_ideal(const BankParams& bank, std::span<const double> waveform, double fs,
                            Exec exec) {
  validate_all(bank);
  const Spectrum spectrum = analyze(waveform);
  const auto nch = static_cast<std::ptrdiff_t>(bank.channels.size());
  Array2D<double> out(bank.channels.size(), waveform.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t c = 0; c < nch; ++c) {
    filter_channel(bank.channels[c], bank.pdk, spectrum, fs, out.row(c));
  }
  return out;
}

std::vector<ChannelGrad> grad_apply_ideal(const BankParams& bank,
                                          std::span<const double> waveform,
                                          const Array2D<double>& upstream, double fs, Exec exec) {
  if (upstream.rows() != bank.channels.size() || upstream.cols() != waveform.size()) {
    throw DomainError("upstream gradient shape does not match channels x samples");
  }
  validate_all(bank);
  const Spectrum spectrum = analyze(waveform);
  std::vector<ChannelGrad> grads(bank.channels.size());
  const auto nch = static_cast<std::ptrdiff_t>(bank.channels.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t c = 0; c < nch; ++c) {
    grads[c] = grad_channel(bank.channels[c], bank.pdk, spectrum, fs, upstream.row(c));
  }
  return grads;
}

BiquadCoeffs discretize_biquad(const ChannelParams& ch, const PdkConstants& pdk, double fs) {
  const auto resp = circuit::derive_response(ch, pdk);
  if (!(fs > 2.0 * resp.fc)) {
    throw AliasingError("sample rate must exceed twice the channel center frequency");
  }
  const Section sec = section_of(ch, pdk);
  const double w0 = std::sqrt(sec.c);
  const double k = w0 / std::tan(w0 / (2.0 * fs));
  const double k2 = k * k;
  const double d0 = k2 + sec.b * k + sec.c;
  BiquadCoeffs q;
  q.b0 = -sec.a * k / d0;
  q.b1 = 0.0;
  q.b2 = sec.a * k / d0;
  q.a1 = 2.0 * (sec.c - k2) / d0;
  q.a2 = (k2 - sec.b * k + sec.c) / d0;
  q.fs = fs;
  return q;
}

std::vector<double> filter_biquad(const BiquadCoeffs& c, std::span<const double> waveform) {
  std::vector<double> y(waveform.size());
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < waveform.size(); ++n) {
    const double x = waveform[n];
    const double out = c.b0 * x + s1;
    s1 = c.b1 * x - c.a1 * out + s2;
    s2 = c.b2 * x - c.a2 * out;
    y[n] = out;
  }
  return y;
}

Complex biquad_response(const BiquadCoeffs& c, double f) {
  const Complex zi = std::polar(1.0, -kTwoPi * f / c.fs);
  return (c.b0 + c.b1 * zi + c.b2 * zi * zi) / (1.0 + c.a1 * zi + c.a2 * zi * zi);
}

std::vector<double> simulate_transient(const ChannelParams& ch, const PdkConstants& pdk,
                                       std::span<const double> waveform, double fs,
                                       std::size_t oversample) {
  if (oversample == 0) throw DomainError("oversample factor must be >= 1");
  const BiquadCoeffs coeffs = discretize_biquad(ch, pdk, fs * static_cast<double>(oversample));
  if (oversample == 1) return filter_biquad(coeffs, waveform);
  const dsp::PolyphaseResampler up(oversample, 1);
  const std::vector<double> fine = filter_biquad(coeffs, up.process(waveform));
  std::vector<double> out(waveform.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = fine[n * oversample];
  return out;
}

Array2D<double> simulate_transient_bank(const BankParams& bank, std::span<const double> waveform,
                                        double fs, std::size_t oversample, Exec exec) {
  validate_all(bank);
  for (const auto& ch : bank.channels) {
    discretize_biquad(ch, bank.pdk, fs * static_cast<double>(std::max<std::size_t>(oversample, 1)));
  }
  Array2D<double> out(bank.channels.size(), waveform.size());
  const auto nch = static_cast<std::ptrdiff_t>(bank.channels.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t c = 0; c < nch; ++c) {
    const auto y = simulate_transient(bank.channels[c], bank.pdk, waveform, fs, oversample);
    std::copy(y.begin(), y.end(), out.row(c).begin());
  }
  return out;
}

}  // namespace learnafe::filterbank
