#include "learnafe/data/corpus.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include "learnafe/data/wav.hpp"
#include "learnafe/io/atomic_file.hpp"

namespace learnafe::data {

namespace fs = std::filesystem;

std::vector<std::string> ClassMap::default_keywords() {
  return {"yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go"};
}

ClassMap::ClassMap(std::vector<std::string> keywords) : keywords_(std::move(keywords)) {
  if (keywords_.size() != kNumClasses - 2) {
    throw DomainError("exactly " + std::to_string(kNumClasses - 2) + " keywords are required");
  }
  std::set<std::string> seen;
  for (const auto& k : keywords_) {
    if (k.empty() || k == "silence" || k == "unknown" || k[0] == '_' || !seen.insert(k).second) {
      throw DomainError("invalid or duplicate keyword '" + k + "'");
    }
  }
}

int ClassMap::label_of(std::string_view word) const {
  if (word == "_silence_" || word == "silence") return kSilence;
  for (std::size_t i = 0; i < keywords_.size(); ++i) {
    if (keywords_[i] == word) return static_cast<int>(i) + 2;
  }
  return kUnknown;
}

std::string ClassMap::name(int id) const {
  if (id == kSilence) return "silence";
  if (id == kUnknown) return "unknown";
  if (id < 2 || id >= static_cast<int>(kNumClasses)) {
    throw DomainError("class id out of range: " + std::to_string(id));
  }
  return keywords_[static_cast<std::size_t>(id - 2)];
}

int ClassMap::id_of_name(std::string_view n) const {
  if (n == "silence") return kSilence;
  if (n == "unknown") return kUnknown;
  for (std::size_t i = 0; i < keywords_.size(); ++i) {
    if (keywords_[i] == n) return static_cast<int>(i) + 2;
  }
  throw FormatError("unknown class name '" + std::string(n) + "'");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw FormatError("unknown split '" + std::string(s) + "'");
}

Split which_set(std::string_view filename, double validation_pct, double test_pct) {
  std::string base(filename);
  if (auto slash = base.find_last_of("/\\"); slash != std::string::npos) base.erase(0, slash + 1);
  if (auto pos = base.find("_nohash_"); pos != std::string::npos) base.erase(pos);

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(base.data(), base.size(), digest, &len, EVP_sha1(), nullptr) != 1 || len != 20) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  // int(hexdigest, 16) % 2^27: the low 27 bits of the big-endian digest
  constexpr std::uint32_t kMaxPerClass = (1u << 27) - 1;
  const std::uint32_t tail = (static_cast<std::uint32_t>(digest[16]) << 24) |
                             (static_cast<std::uint32_t>(digest[17]) << 16) |
                             (static_cast<std::uint32_t>(digest[18]) << 8) | digest[19];
  const double pct = static_cast<double>(tail & kMaxPerClass) * (100.0 / kMaxPerClass);
  if (pct < validation_pct) return Split::Validation;
  if (pct < validation_pct + test_pct) return Split::Test;
  return Split::Train;
}

std::vector<ManifestEntry> SplitManifest::of(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(e);
  }
  return out;
}

std::string expected_layout(const std::string& root) {
  return "expected the speech-commands layout under '" + root +
         "': one subdirectory per word containing 16-bit mono .wav files "
         "(e.g. <root>/yes/0a7c2a8d_nohash_0.wav) and background recordings in "
         "<root>/_background_noise_/*.wav; set --data-root or LEARNAFE_DATA_ROOT";
}

SplitManifest scan_corpus(const std::string& root, const ClassMap& classes) {
  if (!fs::is_directory(root)) throw FormatError("dataset root not found; " + expected_layout(root));
  SplitManifest m;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && e.path().filename().string().front() != '_') dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    const std::string word = d.filename().string();
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file() && e.path().extension() == ".wav") {
        files.push_back(word + "/" + e.path().filename().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (auto& f : files) {
      const Split s = which_set(f);
      m.entries.push_back({std::move(f), classes.label_of(word), s});
    }
  }
  if (m.entries.empty()) throw FormatError("no utterances found; " + expected_layout(root));
  return m;
}

void write_manifest(std::ostream& out, const SplitManifest& m, const ClassMap& classes) {
  for (const auto& e : m.entries) {
    out << e.path << '\t' << classes.name(e.label) << '\t' << split_name(e.split) << '\n';
  }
}

SplitManifest read_manifest(std::istream& in, const ClassMap& classes) {
  SplitManifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    }
    m.entries.push_back({line.substr(0, t1), classes.id_of_name(line.substr(t1 + 1, t2 - t1 - 1)),
                         parse_split(line.substr(t2 + 1))});
  }
  return m;
}

SplitManifest load_or_build_manifest(const std::string& root, const std::string& cache_path,
                                     const ClassMap& classes) {
  if (!cache_path.empty() && fs::exists(cache_path)) {
    std::ifstream in(cache_path);
    if (!in) throw FormatError("cannot read manifest " + cache_path);
    return read_manifest(in, classes);
  }
  SplitManifest m = scan_corpus(root, classes);
  if (!cache_path.empty()) {
    std::ostringstream os;
    write_manifest(os, m, classes);
    io::write_file_atomic(cache_path, os.str());
  }
  return m;
}

Clip training_clip(const ClipSource& src, std::size_t i, std::uint64_t seed,
                   const AugmentConfig& cfg) {
  Rng rng(seed);
  Clip clip;
  clip.label = src.label(i);
  clip.source_path = src.source_path(i);
  const std::size_t window = src.clip_samples();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (clip.label == ClassMap::kSilence) {
    clip.samples = src.noise().segment(rng, window);
    const double g = u01(rng);
    for (auto& v : clip.samples) v *= g;
    clip.noise_mixed = true;
    return clip;
  }
  const std::vector<double> utt = src.utterance(i);
  clip.samples = pad_and_crop(utt, rng, CropMode::Random, window);
  const double coin = u01(rng);
  const double snr = cfg.snr_lo_db + (cfg.snr_hi_db - cfg.snr_lo_db) * u01(rng);
  if (coin < cfg.mix_probability && !src.noise().empty() && mean_power(clip.samples) > 0) {
    const auto noise = src.noise().segment(rng, window);
    clip.samples = mix_noise_at_snr(clip.samples, noise, snr);
    clip.noise_mixed = true;
    clip.snr_db = snr;
  }
  return clip;
}

Clip eval_clip(const ClipSource& src, std::size_t i, std::uint64_t seed,
               std::optional<double> snr_db) {
  Rng rng(seed);
  Clip clip;
  clip.label = src.label(i);
  clip.source_path = src.source_path(i);
  const std::size_t window = src.clip_samples();
  if (clip.label == ClassMap::kSilence) {
    clip.samples = src.noise().segment(rng, window);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double g = u01(rng);
    for (auto& v : clip.samples) v *= g;
    clip.noise_mixed = true;
    return clip;
  }
  clip.samples = pad_and_crop(src.utterance(i), rng, CropMode::Center, window);
  if (snr_db && mean_power(clip.samples) > 0) {
    const auto noise = src.noise().segment(rng, window);
    clip.samples = mix_noise_at_snr(clip.samples, noise, *snr_db);
    clip.noise_mixed = true;
    clip.snr_db = *snr_db;
  }
  return clip;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x5eed, epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

CorpusSource::CorpusSource(std::string root, const SplitManifest& manifest, Split split,
                           NoiseBank noise, std::uint64_t seed, double silence_fraction,
                           double unknown_fraction)
    : root_(std::move(root)), noise_(std::move(noise)) {
  std::vector<Item> unknown;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    if (e.label == ClassMap::kUnknown) {
      unknown.push_back({e.path, e.label});
    } else if (e.label != ClassMap::kSilence) {
      items_.push_back({e.path, e.label});
    }
  }
  const auto n_kw = static_cast<double>(items_.size());
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(split)));
  std::shuffle(unknown.begin(), unknown.end(), rng);
  const auto n_unknown =
      std::min(unknown.size(), static_cast<std::size_t>(std::llround(unknown_fraction * n_kw)));
  items_.insert(items_.end(), unknown.begin(),
                unknown.begin() + static_cast<std::ptrdiff_t>(n_unknown));
  const auto n_silence = static_cast<std::size_t>(std::llround(silence_fraction * n_kw));
  if (n_silence > 0 && noise_.empty()) {
    throw FormatError("silence items need background noise; " + expected_layout(root_));
  }
  for (std::size_t k = 0; k < n_silence; ++k) items_.push_back({"", ClassMap::kSilence});
}

std::vector<double> CorpusSource::utterance(std::size_t i) const {
  const Item& it = items_.at(i);
  if (it.path.empty()) return {};
  const WavData w = load_wav((fs::path(root_) / it.path).string());
  return resample(w.samples, w.sample_rate, static_cast<std::uint32_t>(kSampleRate));
}

SyntheticToneSource::SyntheticToneSource(const SyntheticTaskConfig& cfg, Split split,
                                         NoiseBank noise)
    : seed_(cfg.seed), split_(split), clip_samples_(cfg.clip_samples), noise_(std::move(noise)) {
  if (cfg.labels.empty()) throw DomainError("synthetic task needs at least one class");
  if (clip_samples_ < 2000) throw DomainError("synthetic clips must be at least 0.1 s");
  const std::size_t per = split == Split::Train ? cfg.train_per_class
                          : split == Split::Validation ? cfg.val_per_class
                                                       : cfg.test_per_class;
  for (int l : cfg.labels) {
    if (l < 0 || l >= static_cast<int>(kNumClasses)) throw DomainError("class id out of range");
  }
  if (noise_.empty() && std::find(cfg.labels.begin(), cfg.labels.end(), ClassMap::kSilence) !=
                            cfg.labels.end()) {
    throw DomainError("silence class needs a noise bank");
  }
  // interleave classes so any prefix is balanced
  for (std::size_t k = 0; k < per; ++k) {
    for (int l : cfg.labels) labels_.push_back(l);
  }
}

std::string SyntheticToneSource::source_path(std::size_t i) const {
  return "synthetic/" + std::string(split_name(split_)) + "/" + std::to_string(i);
}

std::vector<double> SyntheticToneSource::utterance(std::size_t i) const {
  const int label = labels_.at(i);
  if (label == ClassMap::kSilence) return {};
  Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(split_) + 1, i));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t n = clip_samples_;
  std::vector<double> x(n, 0.0);
  const double fs = kSampleRate;
  const double dur = (0.35 + 0.35 * u01(rng)) * static_cast<double>(n) / fs;
  const auto len = static_cast<std::size_t>(dur * fs);
  const auto onset = static_cast<std::size_t>(u01(rng) * static_cast<double>(n - len));
  const double amp = 0.1 + 0.4 * u01(rng);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  if (label == ClassMap::kUnknown) {
    const double f1 = 200.0 * std::pow(20.0, u01(rng));
    const double f2 = 200.0 * std::pow(20.0, u01(rng));
    for (std::size_t t = 0; t < len; ++t) {
      const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(t) / static_cast<double>(len));
      const double tt = static_cast<double>(t) / fs;
      x[onset + t] = amp * w * 0.5 * (std::sin(kTwoPi * f1 * tt) + std::sin(kTwoPi * f2 * tt));
    }
    return x;
  }

  const int j = label - 2;
  const double lo = 250.0 * std::pow(1.6, j / 2) * (0.85 + 0.3 * u01(rng));
  const double hi = lo * 8.0 * (0.85 + 0.3 * u01(rng));
  const bool up = j % 2 == 0;
  const double f_start = up ? lo : hi;
  const double f_end = up ? hi : lo;
  // exponential chirp: phase = 2 pi f0 T (r^(t/T) - 1) / ln r
  const double big_t = static_cast<double>(len) / fs;
  const double lr = std::log(f_end / f_start);
  for (std::size_t t = 0; t < len; ++t) {
    const double tt = static_cast<double>(t) / fs;
    const double phase = kTwoPi * f_start * big_t * (std::exp(lr * tt / big_t) - 1.0) / lr;
    const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(t) / static_cast<double>(len));
    x[onset + t] = amp * w * std::sin(phase);
  }
  return x;
}

}  // namespace learnafe::data
