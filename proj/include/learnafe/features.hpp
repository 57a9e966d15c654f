#pragma once

// Spike-count spectrogram: half-wave rectification followed by a frame-summed
// integrate-and-fire approximation.

#include <iosfwd>
#include <span>
#include <string>

#include "learnafe/common.hpp"

namespace learnafe::features {

enum class SpikeMode { Continuous, Quantized };

struct FeatureConfig {
  std::size_t frame_len = 200;  // samples; 10 ms at 20 kHz
  double theta = 1.0;           // integration threshold
  SpikeMode mode = SpikeMode::Continuous;
};

struct SpikeSpectrogram {
  Array2D<double> values;  // channels x frames
  std::size_t frame_len = 0;
  double theta = 0.0;
};

std::size_t frame_count(std::size_t samples, std::size_t frame_len);

/// values[c][f] = sum over frame f of max(0, x[c][t]) / theta, floored in
/// quantized mode. Trailing samples that do not fill a frame are dropped.
SpikeSpectrogram spectrogram(const Array2D<double>& filtered, const FeatureConfig& cfg);

/// Gradient with respect to the filtered samples: upstream/theta where the
/// sample is positive, 0 elsewhere (including exactly 0).
Array2D<double> grad_spectrogram(const Array2D<double>& filtered,
                                 const Array2D<double>& upstream, const FeatureConfig& cfg);

/// Reads a transient-simulation CSV: header `time_s,ch01,...,ch16`, one row per
/// time step. The step must stay within 1% of 1/fs.
Array2D<double> import_transient(const std::string& path, double fs = kSampleRate);
Array2D<double> parse_transient(std::istream& in, double fs = kSampleRate);

void write_transient(std::ostream& out, const Array2D<double>& channels, double fs = kSampleRate);

/// Header `channel,frame0,frame1,...`; one row per channel (1-based).
void write_spectrogram_csv(std::ostream& out, const SpikeSpectrogram& s);

}  // namespace learnafe::features
