#include <filesystem>
#include <fstream>

#include "learnafe/io/csv.hpp"
#include "learnafe/train/trainer.hpp"

namespace learnafe::train {

IdealFeatureSource::IdealFeatureSource(const data::ClipSource& clips, circuit::BankParams bank,
                                       features::FeatureConfig cfg, ClipProtocol protocol,
                                       std::uint64_t seed, std::optional<double> snr_db,
                                       data::AugmentConfig aug)
    : clips_(clips),
      bank_(std::move(bank)),
      cfg_(cfg),
      protocol_(protocol),
      seed_(seed),
      snr_db_(snr_db),
      aug_(aug) {
  for (const auto& ch : bank_.channels) ch.validate();
}

features::SpikeSpectrogram IdealFeatureSource::features(std::size_t i, std::size_t epoch) const {
  const data::Clip clip = protocol_ == ClipProtocol::Train
                              ? data::training_clip(clips_, i, derive_seed(seed_, epoch, i), aug_)
                              : data::eval_clip(clips_, i, derive_seed(seed_, i), snr_db_);
  return frontend_forward(bank_, clip.samples, cfg_);
}

TransientFeatureSource::TransientFeatureSource(const data::ClipSource& clips,
                                               const circuit::BankParams& bank,
                                               const features::FeatureConfig& cfg,
                                               ClipProtocol protocol, std::uint64_t seed,
                                               std::size_t oversample, Exec exec) {
  const std::size_t n = clips.size();
  labels_.resize(n);
  feats_.resize(n);
  // pre-validate so nothing throws inside the parallel region
  for (const auto& ch : bank.channels) {
    filterbank::discretize_biquad(ch, bank.pdk, kSampleRate * static_cast<double>(oversample));
  }
  const auto nn = static_cast<std::ptrdiff_t>(n);
  ExceptionSlot err;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
  for (std::ptrdiff_t k = 0; k < nn; ++k) {
    try {
      const auto i = static_cast<std::size_t>(k);
      const data::Clip clip = protocol == ClipProtocol::Train
                                  ? data::training_clip(clips, i, derive_seed(seed, 0, i))
                                  : data::eval_clip(clips, i, derive_seed(seed, i));
      labels_[i] = clip.label;
      feats_[i] = transient_features(bank, clip.samples, cfg, oversample);
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow();
}

ImportedFeatureSource::ImportedFeatureSource(const std::vector<Item>& items,
                                             const features::FeatureConfig& cfg) {
  if (items.empty()) {
    throw FormatError("no transient files to import; expected `path<TAB>label` entries");
  }
  for (const auto& it : items) {
    labels_.push_back(it.label);
    paths_.push_back(it.path);
    feats_.push_back(features::spectrogram(features::import_transient(it.path), cfg));
  }
}

std::vector<ImportedFeatureSource::Item> read_transient_list(const std::string& list_path,
                                                             const data::ClassMap& classes) {
  std::ifstream in(list_path);
  if (!in) throw FormatError("cannot open transient list " + list_path);
  const auto dir = std::filesystem::path(list_path).parent_path();
  std::vector<ImportedFeatureSource::Item> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = io::split_fields(line, '\t');
    if (f.size() < 2) {
      throw FormatError(list_path + ":" + std::to_string(lineno) + ": expected path<TAB>label");
    }
    std::filesystem::path p(f[0]);
    if (p.is_relative()) p = dir / p;
    items.push_back({p.string(), classes.id_of_name(f[1])});
  }
  if (items.empty()) throw FormatError("transient list " + list_path + " has no entries");
  return items;
}

}  // namespace learnafe::train
