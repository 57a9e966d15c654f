#pragma once

// Speech-commands corpus indexing, 12-class label mapping, and the clip
// sources consumed by training and evaluation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "learnafe/common.hpp"
#include "learnafe/data/augment.hpp"

namespace learnafe::data {

/// Class ids: 0 = silence, 1 = unknown, 2..11 = keywords in configured order.
class ClassMap {
 public:
  static constexpr int kSilence = 0;
  static constexpr int kUnknown = 1;

  static std::vector<std::string> default_keywords();

  explicit ClassMap(std::vector<std::string> keywords = default_keywords());

  int label_of(std::string_view word) const;
  std::string name(int id) const;
  /// Inverse of name(); throws FormatError for unrecognized names.
  int id_of_name(std::string_view name) const;
  const std::vector<std::string>& keywords() const { return keywords_; }

 private:
  std::vector<std::string> keywords_;
};

enum class Split { Train, Validation, Test };

std::string_view split_name(Split s);
Split parse_split(std::string_view s);

/// Canonical corpus assignment: SHA-1 of the file name with any `_nohash_`
/// suffix removed, so all takes of one speaker land in the same split.
Split which_set(std::string_view filename, double validation_pct = 10.0, double test_pct = 10.0);

struct ManifestEntry {
  std::string path;  // relative to the dataset root, e.g. "yes/0a7c2a8d_nohash_0.wav"
  int label = 0;
  Split split = Split::Train;
};

struct SplitManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> of(Split s) const;
};

/// Message describing the directory layout expected under a dataset root.
std::string expected_layout(const std::string& root);

/// Walks <root>/<word>/*.wav, skipping directories that start with '_'.
SplitManifest scan_corpus(const std::string& root, const ClassMap& classes);

/// Text form: one `path<TAB>label<TAB>split` line per entry, label by name.
void write_manifest(std::ostream& out, const SplitManifest& m, const ClassMap& classes);
SplitManifest read_manifest(std::istream& in, const ClassMap& classes);

/// Reads the cached manifest if present, otherwise scans and writes it.
SplitManifest load_or_build_manifest(const std::string& root, const std::string& cache_path,
                                     const ClassMap& classes);

struct Clip {
  std::vector<double> samples;  // 20 kHz
  int label = 0;
  std::string source_path;
  bool noise_mixed = false;
  double snr_db = 0.0;  // meaningful when noise_mixed and the clip is not silence
};

/// Indexed collection of labelled utterances of one split. Implementations
/// are immutable after construction so clips can be produced concurrently.
class ClipSource {
 public:
  virtual ~ClipSource() = default;

  virtual std::size_t size() const = 0;
  virtual int label(std::size_t i) const = 0;
  virtual std::string source_path(std::size_t i) const = 0;
  /// Raw utterance at 20 kHz before padding; empty for silence items.
  virtual std::vector<double> utterance(std::size_t i) const = 0;
  virtual const NoiseBank& noise() const = 0;
  /// Window length of the produced clips.
  virtual std::size_t clip_samples() const { return kClipSamples; }
};

struct AugmentConfig {
  double mix_probability = 0.8;
  double snr_lo_db = 5.0;
  double snr_hi_db = 20.0;
};

/// Random crop plus SNR-aware noise mixing; silence items become a noise
/// segment scaled by U[0, 1]. Deterministic in (i, seed).
Clip training_clip(const ClipSource& src, std::size_t i, std::uint64_t seed,
                   const AugmentConfig& cfg = {});

/// Center crop; mixes noise at a fixed SNR when given. The noise segment is
/// chosen from `seed` only, so every SNR level reuses the same segment.
Clip eval_clip(const ClipSource& src, std::size_t i, std::uint64_t seed,
               std::optional<double> snr_db = std::nullopt);

/// Shuffled visiting order of one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

/// Clips of one corpus split. Unknown-word utterances are subsampled and
/// silence items are appended, each to `fraction * keyword count` items.
class CorpusSource final : public ClipSource {
 public:
  CorpusSource(std::string root, const SplitManifest& manifest, Split split, NoiseBank noise,
               std::uint64_t seed, double silence_fraction = 0.1, double unknown_fraction = 0.1);

  std::size_t size() const override { return items_.size(); }
  int label(std::size_t i) const override { return items_.at(i).label; }
  std::string source_path(std::size_t i) const override { return items_.at(i).path; }
  std::vector<double> utterance(std::size_t i) const override;
  const NoiseBank& noise() const override { return noise_; }

 private:
  struct Item {
    std::string path;  // empty for silence
    int label;
  };
  std::string root_;
  std::vector<Item> items_;
  NoiseBank noise_;
};

struct SyntheticTaskConfig {
  std::vector<int> labels = {ClassMap::kSilence, 2, 3};
  std::size_t train_per_class = 120;
  std::size_t val_per_class = 40;
  std::size_t test_per_class = 40;
  std::size_t clip_samples = kClipSamples;
  std::uint64_t seed = 1;
};

/// Procedural stand-in for the corpus. Keyword class j (id 2 + j) is a
/// Hann-windowed log chirp, upward for even j and downward for odd j, over a
/// band that moves up with j/2; unknown items are pairs of steady tones.
/// Onset, duration, band edges and level are randomized per item.
class SyntheticToneSource final : public ClipSource {
 public:
  SyntheticToneSource(const SyntheticTaskConfig& cfg, Split split, NoiseBank noise);

  std::size_t size() const override { return labels_.size(); }
  int label(std::size_t i) const override { return labels_.at(i); }
  std::string source_path(std::size_t i) const override;
  std::vector<double> utterance(std::size_t i) const override;
  const NoiseBank& noise() const override { return noise_; }
  std::size_t clip_samples() const override { return clip_samples_; }

 private:
  std::vector<int> labels_;
  std::uint64_t seed_;
  Split split_;
  std::size_t clip_samples_;
  NoiseBank noise_;
};

}  // namespace learnafe::data
