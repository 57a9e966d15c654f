#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace learnafe::data {

struct WavData {
  std::uint32_t sample_rate = 0;
  std::vector<double> samples;  // normalized to [-1, 1)
};

/// Reads a 16-bit PCM mono RIFF/WAVE file. Throws FormatError otherwise.
WavData load_wav(const std::string& path);
WavData parse_wav(std::span<const std::uint8_t> bytes);

/// Writes 16-bit PCM mono; samples are clipped to [-1, 32767/32768].
void write_wav(const std::string& path, std::span<const double> samples, std::uint32_t sample_rate);
std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate,
                                     std::uint16_t channels = 1, std::uint16_t bits = 16);

}  // namespace learnafe::data
