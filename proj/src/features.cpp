#include "learnafe/features.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "learnafe/io/csv.hpp"

namespace learnafe::features {

namespace {

void check_config(const FeatureConfig& cfg) {
  if (!(cfg.theta > 0)) throw DomainError("integration threshold theta must be positive");
  if (cfg.frame_len == 0) throw DomainError("frame length must be at least one sample");
}

std::string channel_name(std::size_t c) {
  std::string s = "ch";
  if (c + 1 < 10) s += '0';
  return s + std::to_string(c + 1);
}

}  // namespace

std::size_t frame_count(std::size_t samples, std::size_t frame_len) {
  return frame_len == 0 ? 0 : samples / frame_len;
}

SpikeSpectrogram spectrogram(const Array2D<double>& filtered, const FeatureConfig& cfg) {
  check_config(cfg);
  if (filtered.cols() < cfg.frame_len) throw DomainError("waveform shorter than one frame");
  const std::size_t frames = frame_count(filtered.cols(), cfg.frame_len);
  SpikeSpectrogram s{Array2D<double>(filtered.rows(), frames), cfg.frame_len, cfg.theta};
  for (std::size_t c = 0; c < filtered.rows(); ++c) {
    const auto x = filtered.row(c);
    for (std::size_t f = 0; f < frames; ++f) {
      double acc = 0.0;
      for (std::size_t t = f * cfg.frame_len; t < (f + 1) * cfg.frame_len; ++t) {
        acc += x[t] > 0.0 ? x[t] : 0.0;
      }
      double v = acc / cfg.theta;
      if (cfg.mode == SpikeMode::Quantized) v = std::floor(v);
      s.values(c, f) = v;
    }
  }
  return s;
}

Array2D<double> grad_spectrogram(const Array2D<double>& filtered,
                                 const Array2D<double>& upstream, const FeatureConfig& cfg) {
  check_config(cfg);
  if (cfg.mode != SpikeMode::Continuous) {
    throw ModeError("spike quantization is not differentiable");
  }
  const std::size_t frames = frame_count(filtered.cols(), cfg.frame_len);
  if (upstream.rows() != filtered.rows() || upstream.cols() != frames) {
    throw DomainError("upstream gradient shape does not match the spectrogram");
  }
  Array2D<double> g(filtered.rows(), filtered.cols(), 0.0);
  const double inv = 1.0 / cfg.theta;
  for (std::size_t c = 0; c < filtered.rows(); ++c) {
    const auto x = filtered.row(c);
    auto gx = g.row(c);
    for (std::size_t f = 0; f < frames; ++f) {
      const double u = upstream(c, f) * inv;
      for (std::size_t t = f * cfg.frame_len; t < (f + 1) * cfg.frame_len; ++t) {
        if (x[t] > 0.0) gx[t] = u;
      }
    }
  }
  return g;
}

Array2D<double> import_transient(const std::string& path, double fs) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open transient file: " + path);
  try {
    return parse_transient(in, fs);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

Array2D<double> parse_transient(std::istream& in, double fs) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty transient file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      header.push_back(cell);
    }
  }
  if (header.size() != kNumChannels + 1) {
    throw FormatError("expected time column plus 16 channels, found " +
                      std::to_string(header.empty() ? 0 : header.size() - 1) + " channels");
  }
  if (header[0] != "time_s") throw FormatError("first column must be time_s");
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (header[c + 1] != channel_name(c)) {
      throw FormatError("unexpected column '" + header[c + 1] + "', expected " + channel_name(c));
    }
  }

  std::vector<std::vector<double>> cols(kNumChannels);
  const double step = 1.0 / fs;
  double prev_t = 0.0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || !std::isfinite(v)) {
        throw FormatError("malformed value on data row " + std::to_string(row + 1));
      }
      vals.push_back(v);
    }
    if (vals.size() != kNumChannels + 1) {
      throw FormatError("data row " + std::to_string(row + 1) + " has " +
                        std::to_string(vals.size()) + " columns, expected 17");
    }
    if (row > 0 && std::abs((vals[0] - prev_t) - step) > 0.01 * step) {
      throw FormatError("non-uniform time step at row " + std::to_string(row + 1) +
                        " (expected " + std::to_string(step * 1e6) + " us within 1%)");
    }
    prev_t = vals[0];
    for (std::size_t c = 0; c < kNumChannels; ++c) cols[c].push_back(vals[c + 1]);
    ++row;
  }
  if (row == 0) throw FormatError("transient file has no data rows");
  Array2D<double> out(kNumChannels, row);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    std::copy(cols[c].begin(), cols[c].end(), out.row(c).begin());
  }
  return out;
}

void write_transient(std::ostream& out, const Array2D<double>& channels, double fs) {
  out << "time_s";
  for (std::size_t c = 0; c < channels.rows(); ++c) out << ',' << channel_name(c);
  out << '\n';
  const auto old = out.precision(17);
  for (std::size_t t = 0; t < channels.cols(); ++t) {
    out << static_cast<double>(t) / fs;
    for (std::size_t c = 0; c < channels.rows(); ++c) out << ',' << channels(c, t);
    out << '\n';
  }
  out.precision(old);
}

void write_spectrogram_csv(std::ostream& out, const SpikeSpectrogram& s) {
  out << "channel";
  for (std::size_t f = 0; f < s.values.cols(); ++f) out << ",frame" << f;
  out << '\n';
  for (std::size_t c = 0; c < s.values.rows(); ++c) {
    out << c + 1;
    for (std::size_t f = 0; f < s.values.cols(); ++f) out << ',' << io::format_double(s.values(c, f));
    out << '\n';
  }
}

}  // namespace learnafe::features
