#include "learnafe/data/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "learnafe/common.hpp"

namespace learnafe::data {

namespace {

std::uint32_t u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

WavData parse_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  WavData out;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a bogus size on the final data chunk.
      if (std::memcmp(hdr, "data", 4) != 0) throw FormatError("truncated WAVE chunk");
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too short");
      format = u16(bytes.data() + body);
      channels = u16(bytes.data() + body + 2);
      out.sample_rate = u32(bytes.data() + body + 4);
      bits = u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk precedes fmt chunk");
      if (format != 1) throw FormatError("only PCM WAVE files are supported");
      if (channels != 1) throw FormatError("expected mono audio, found " + std::to_string(channels) + " channels");
      if (bits != 16) throw FormatError("expected 16-bit samples, found " + std::to_string(bits) + "-bit");
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      const std::size_t n = avail / 2;
      out.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::int16_t>(u16(bytes.data() + body + 2 * i));
        out.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(have_fmt ? "WAVE file has no data chunk" : "WAVE file has no fmt chunk");
}

WavData load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open WAVE file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return parse_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate,
                                     std::uint16_t channels, std::uint16_t bits) {
  const std::uint16_t bytes_per_sample = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(samples.size() * bytes_per_sample);
  std::vector<std::uint8_t> b;
  b.reserve(44 + data_size);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put32(b, 36 + data_size);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(b, 16);
  put16(b, 1);
  put16(b, channels);
  put32(b, sample_rate);
  put32(b, sample_rate * channels * bytes_per_sample);
  put16(b, static_cast<std::uint16_t>(channels * bytes_per_sample));
  put16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put32(b, data_size);
  for (double s : samples) {
    const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    const auto v = static_cast<std::int32_t>(q);
    for (std::uint16_t k = 0; k < bytes_per_sample; ++k) {
      // 16-bit payload; wider encodings only exist for rejection tests
      b.push_back(k < 2 ? static_cast<std::uint8_t>((static_cast<std::uint32_t>(v) >> (8 * k)) & 0xff) : 0);
    }
  }
  return b;
}

void write_wav(const std::string& path, std::span<const double> samples, std::uint32_t sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write WAVE file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace learnafe::data
