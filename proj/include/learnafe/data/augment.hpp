#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "learnafe/common.hpp"

namespace learnafe::data {

using Rng = std::mt19937_64;

/// 16 kHz -> 20 kHz, 5:4 polyphase windowed sinc (Kaiser, 64 taps per phase).
std::vector<double> resample_16k_to_20k(std::span<const double> x);

/// Resamples between arbitrary integer rates.
std::vector<double> resample(std::span<const double> x, std::uint32_t from_hz, std::uint32_t to_hz);

enum class CropMode { Random, Center };

inline constexpr std::size_t kPadSamples = 2000;  // 0.1 s at 20 kHz

/// Pads 0.1 s of silence on both sides and cuts a 1 s window. Inputs shorter
/// than 0.8 s are zero-extended at the end so a full window always exists.
std::vector<double> pad_and_crop(std::span<const double> x, Rng& rng,
                                 CropMode mode = CropMode::Random,
                                 std::size_t window = kClipSamples);

/// Offset range of the crop window for an input of n samples.
std::size_t max_crop_offset(std::size_t n, std::size_t window = kClipSamples);

double mean_power(std::span<const double> x);

/// clean + g * noise with g chosen so the clean-to-scaled-noise power ratio
/// equals snr_db. Targets above 100 dB are capped at 100 dB.
std::vector<double> mix_noise_at_snr(std::span<const double> clean, std::span<const double> noise,
                                     double snr_db);

/// Gain applied to the noise by mix_noise_at_snr.
double noise_gain_for_snr(std::span<const double> clean, std::span<const double> noise,
                          double snr_db);

/// Long background recordings at 20 kHz from which segments are cut.
class NoiseBank {
 public:
  NoiseBank() = default;
  explicit NoiseBank(std::vector<std::vector<double>> segments);

  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }
  const std::vector<double>& recording(std::size_t i) const { return segments_[i]; }

  /// Uniformly chosen recording and offset; recordings shorter than `length`
  /// are tiled.
  std::vector<double> segment(Rng& rng, std::size_t length) const;

  /// Loads every .wav file in a directory and resamples it to 20 kHz.
  static NoiseBank load_directory(const std::string& dir);

  /// White, pink-like and brown-like noise recordings for synthetic tasks.
  static NoiseBank synthetic(std::uint64_t seed, std::size_t recordings = 3,
                             std::size_t length = 60 * kClipSamples);

 private:
  std::vector<std::vector<double>> segments_;
};

}  // namespace learnafe::data
