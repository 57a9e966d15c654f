#include "learnafe/data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "learnafe/data/wav.hpp"
#include "learnafe/dsp/resampler.hpp"

namespace learnafe::data {

std::vector<double> resample_16k_to_20k(std::span<const double> x) {
  static const dsp::PolyphaseResampler r(5, 4, 64, 8.0);
  return r.process(x);
}

std::vector<double> resample(std::span<const double> x, std::uint32_t from_hz, std::uint32_t to_hz) {
  if (from_hz == 0 || to_hz == 0) throw DomainError("sample rates must be positive");
  if (from_hz == to_hz) return {x.begin(), x.end()};
  if (from_hz == 16000 && to_hz == 20000) return resample_16k_to_20k(x);
  return dsp::PolyphaseResampler(to_hz, from_hz, 64, 8.0).process(x);
}

std::size_t max_crop_offset(std::size_t n, std::size_t window) {
  const std::size_t padded = std::max(n + 2 * kPadSamples, window);
  return padded - window;
}

std::vector<double> pad_and_crop(std::span<const double> x, Rng& rng, CropMode mode,
                                 std::size_t window) {
  const std::size_t padded_len = std::max(x.size() + 2 * kPadSamples, window);
  std::vector<double> padded(padded_len, 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + kPadSamples);
  const std::size_t max_off = padded_len - window;
  std::size_t off = max_off / 2;
  if (mode == CropMode::Random) {
    std::uniform_int_distribution<std::size_t> dist(0, max_off);
    off = dist(rng);
  }
  return {padded.begin() + static_cast<std::ptrdiff_t>(off),
          padded.begin() + static_cast<std::ptrdiff_t>(off + window)};
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

double noise_gain_for_snr(std::span<const double> clean, std::span<const double> noise,
                          double snr_db) {
  if (clean.size() != noise.size()) throw DomainError("clean and noise lengths differ");
  const double pc = mean_power(clean);
  const double pn = mean_power(noise);
  if (!(pn > 0)) throw DomainError("noise segment has zero power");
  if (!(pc > 0)) throw DomainError("clean signal has zero power");
  const double snr = std::min(snr_db, 100.0);
  return std::sqrt(pc / (pn * std::pow(10.0, snr / 10.0)));
}

std::vector<double> mix_noise_at_snr(std::span<const double> clean, std::span<const double> noise,
                                     double snr_db) {
  const double g = noise_gain_for_snr(clean, noise, snr_db);
  std::vector<double> out(clean.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = clean[i] + g * noise[i];
  return out;
}

NoiseBank::NoiseBank(std::vector<std::vector<double>> segments) : segments_(std::move(segments)) {
  segments_.erase(std::remove_if(segments_.begin(), segments_.end(),
                                 [](const auto& s) { return s.empty(); }),
                  segments_.end());
}

std::vector<double> NoiseBank::segment(Rng& rng, std::size_t length) const {
  if (segments_.empty()) throw DomainError("noise bank is empty");
  std::uniform_int_distribution<std::size_t> pick(0, segments_.size() - 1);
  const auto& rec = segments_[pick(rng)];
  std::vector<double> out(length);
  if (rec.size() >= length) {
    std::uniform_int_distribution<std::size_t> off(0, rec.size() - length);
    const std::size_t o = off(rng);
    std::copy_n(rec.begin() + static_cast<std::ptrdiff_t>(o), length, out.begin());
  } else {
    std::uniform_int_distribution<std::size_t> off(0, rec.size() - 1);
    std::size_t o = off(rng);
    for (std::size_t i = 0; i < length; ++i) out[i] = rec[(o + i) % rec.size()];
  }
  return out;
}

NoiseBank NoiseBank::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw FormatError("noise directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::vector<double>> recs;
  for (const auto& f : files) {
    const WavData w = load_wav(f.string());
    recs.push_back(resample(w.samples, w.sample_rate, static_cast<std::uint32_t>(kSampleRate)));
  }
  if (recs.empty()) throw FormatError("no .wav recordings in noise directory " + dir);
  return NoiseBank(std::move(recs));
}

NoiseBank NoiseBank::synthetic(std::uint64_t seed, std::size_t recordings, std::size_t length) {
  std::vector<std::vector<double>> recs;
  for (std::size_t r = 0; r < recordings; ++r) {
    Rng rng(derive_seed(seed, r));
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> x(length);
    // kind 0: white, 1: one-pole lowpassed, 2: leaky integrated (brown-like)
    const std::size_t kind = r % 3;
    double state = 0.0;
    const double pole = kind == 1 ? 0.9 : 0.995;
    for (auto& v : x) {
      const double w = n01(rng);
      if (kind == 0) {
        v = w;
      } else {
        state = pole * state + (1.0 - pole) * w * (kind == 1 ? 3.0 : 10.0);
        v = state;
      }
    }
    const double rms = std::sqrt(mean_power(x));
    for (auto& v : x) v *= 0.1 / rms;
    recs.push_back(std::move(x));
  }
  return NoiseBank(std::move(recs));
}

}  // namespace learnafe::data
