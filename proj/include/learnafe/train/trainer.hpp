#pragma once

// Co-design training of the front-end bank and the DSCNN classifier,
// classifier-only finetuning, SNR-sweep evaluation and hardware reporting.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "learnafe/circuit.hpp"
#include "learnafe/data/corpus.hpp"
#include "learnafe/features.hpp"
#include "learnafe/nn/dscnn.hpp"
#include "learnafe/nn/optim.hpp"
#include "learnafe/train/frontend.hpp"

namespace learnafe::train {

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Hyperparams {
  double lr = 3e-3;
  double l2 = 1e-4;         // decoupled weight decay
  double lambda_ce = 1.0;
  double lambda_i = 1e-2;
  double lambda_c = 1e-2;

  /// lr and lambda_ce must be positive, the rest non-negative.
  void validate() const;
};

enum class TrainMode { Codesign, FixedAfe, DirectCircuit, Finetune };

std::string_view mode_name(TrainMode m);
TrainMode parse_mode(std::string_view s);

struct TrainConfig {
  Hyperparams hp;
  TrainMode mode = TrainMode::Codesign;
  nn::DecayKind decay_kind = nn::DecayKind::L2;
  std::size_t batch_size = 64;
  std::size_t epochs = 20;
  std::size_t finetune_epochs = 5;
  std::uint64_t seed = 1;
  features::FeatureConfig features;
  data::AugmentConfig augment;
  nn::DscnnConfig model;
  circuit::BankConfig bank;
  circuit::PdkConstants pdk;
  Exec exec = Exec::Parallel;
};

struct LossBreakdown {
  double l_ce = 0.0;
  double l_p = 0.0;  // sum of phi_I
  double l_a = 0.0;  // sum of phi_C
  double l_total = 0.0;
};

/// l_total = lambda_ce * l_ce + lambda_i * sum(phi_I) + lambda_c * sum(phi_C).
LossBreakdown codesign_loss(double l_ce, const circuit::BankParams& bank, const Hyperparams& hp);

struct EpochReport {
  std::size_t epoch = 0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  LossBreakdown loss;  // averages over the epoch's steps
  double power_w = 0.0;
  double area_mm2 = 0.0;
};

/// Header `epoch,train_acc,val_acc,l_ce,l_p,l_a,power_nw,area_mm2`.
void write_epoch_header(std::ostream& out);
void write_epoch_row(std::ostream& out, const EpochReport& r);

struct HardwareReport {
  double power_w = 0.0;
  double area_mm2 = 0.0;
  double baseline_power_w = 0.0;
  double baseline_area_mm2 = 0.0;
  double power_change_pct = 0.0;  // negative = reduction
  double area_change_pct = 0.0;
  std::vector<circuit::ChannelResponse> channels;
  std::vector<double> channel_power_w;
  std::vector<double> phi_i, phi_c;
};

HardwareReport report_hardware(const circuit::BankParams& bank,
                               const circuit::BankParams& baseline);
/// Per-channel CSV `channel,fc_hz,q,gain,gain_db,phi_i,phi_c,power_nw`.
void write_hardware_csv(std::ostream& out, const HardwareReport& r);
std::string hardware_json(const HardwareReport& r);

/// Labelled spectrograms for classifier-only training and evaluation.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual std::size_t size() const = 0;
  virtual int label(std::size_t i) const = 0;
  /// Features of item i in a given epoch. Must be safe to call concurrently.
  virtual features::SpikeSpectrogram features(std::size_t i, std::size_t epoch) const = 0;
};

enum class ClipProtocol { Train, Eval };

/// Ideal-path features of a clip source through a fixed bank. Train protocol
/// augments per epoch; Eval protocol uses a center crop with optional fixed
/// SNR mixing.
class IdealFeatureSource final : public FeatureSource {
 public:
  IdealFeatureSource(const data::ClipSource& clips, circuit::BankParams bank,
                     features::FeatureConfig cfg, ClipProtocol protocol, std::uint64_t seed,
                     std::optional<double> snr_db = std::nullopt, data::AugmentConfig aug = {});
  std::size_t size() const override { return clips_.size(); }
  int label(std::size_t i) const override { return clips_.label(i); }
  features::SpikeSpectrogram features(std::size_t i, std::size_t epoch) const override;

 private:
  const data::ClipSource& clips_;
  circuit::BankParams bank_;
  features::FeatureConfig cfg_;
  ClipProtocol protocol_;
  std::uint64_t seed_;
  std::optional<double> snr_db_;
  data::AugmentConfig aug_;
};

/// Biquad-path features of fixed (epoch-independent) clips, computed once.
class TransientFeatureSource final : public FeatureSource {
 public:
  TransientFeatureSource(const data::ClipSource& clips, const circuit::BankParams& bank,
                         const features::FeatureConfig& cfg, ClipProtocol protocol,
                         std::uint64_t seed, std::size_t oversample = 8, Exec exec = Exec::Parallel);
  std::size_t size() const override { return labels_.size(); }
  int label(std::size_t i) const override { return labels_.at(i); }
  features::SpikeSpectrogram features(std::size_t i, std::size_t) const override {
    return feats_.at(i);
  }

 private:
  std::vector<int> labels_;
  std::vector<features::SpikeSpectrogram> feats_;
};

/// Features computed from externally simulated transient CSV files.
class ImportedFeatureSource final : public FeatureSource {
 public:
  struct Item {
    std::string path;
    int label;
  };
  ImportedFeatureSource(const std::vector<Item>& items, const features::FeatureConfig& cfg);
  std::size_t size() const override { return labels_.size(); }
  int label(std::size_t i) const override { return labels_.at(i); }
  features::SpikeSpectrogram features(std::size_t i, std::size_t) const override {
    return feats_.at(i);
  }
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<int> labels_;
  std::vector<std::string> paths_;
  std::vector<features::SpikeSpectrogram> feats_;
};

/// Reads `path<TAB>label` lines (label by class name); paths are relative to
/// the list file's directory.
std::vector<ImportedFeatureSource::Item> read_transient_list(const std::string& list_path,
                                                             const data::ClassMap& classes);

struct SnrAccuracy {
  double snr_db;  // +inf for clean
  double accuracy;
};

void write_snr_csv(std::ostream& out, const std::vector<SnrAccuracy>& rows);

template <class T>
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  const TrainConfig& config() const { return cfg_; }
  TrainMode mode() const { return cfg_.mode; }
  /// Finetune mode freezes the bank; the other modes follow the config.
  void set_mode(TrainMode m);

  nn::Dscnn<T>& model() { return model_; }
  const nn::Dscnn<T>& model() const { return model_; }
  LearnableBank& learnable_bank() { return bank_; }
  circuit::BankParams bank() const { return bank_.params(); }
  const circuit::BankParams& initial_bank() const { return initial_bank_; }
  std::size_t epoch() const { return epoch_; }

  /// One pass over `train` in the configured mode; validation features are
  /// produced with the fixed mixed-SNR protocol when `val` is given.
  EpochReport train_epoch(const data::ClipSource& train, const data::ClipSource* val);

  std::vector<EpochReport> fit(const data::ClipSource& train, const data::ClipSource* val,
                               std::size_t epochs,
                               const std::function<void(const EpochReport&)>& on_epoch = {});

  /// Cross-entropy-only classifier training on fixed features. The bank is
  /// never touched.
  std::vector<EpochReport> finetune(const FeatureSource& train, const FeatureSource* val,
                                    std::size_t epochs);

  /// Top-1 accuracy with batch-norm running statistics.
  double accuracy(const FeatureSource& src, std::size_t epoch = 0);

  /// Accuracy per SNR on `test`; an empty optional is the clean entry.
  std::vector<SnrAccuracy> evaluate(const data::ClipSource& test,
                                    const std::vector<std::optional<double>>& snrs);

  /// Loss and gradient of one fixed batch of waveforms, without an optimizer
  /// step. Used for gradient checks; grads are left in the model and
  /// returned for the bank variables.
  struct BatchGrad {
    LossBreakdown loss;
    std::vector<double> bank_grad;
  };
  BatchGrad batch_gradient(const std::vector<std::vector<double>>& waves,
                           const std::vector<int>& labels, bool training_bn);

  /// Writes a versioned JSON checkpoint; load restores it bit-exactly.
  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);
  std::string checkpoint_text() const;
  void load_checkpoint_text(const std::string& text);

  /// Contract check: throws ContractViolation in finetune mode.
  void step_bank(const std::vector<double>& grad);

 private:
  struct StepResult {
    LossBreakdown loss;
    std::size_t correct = 0;
  };
  StepResult step(const std::vector<data::Clip>& clips);
  StepResult step_features(const std::vector<features::SpikeSpectrogram>& feats,
                           const std::vector<int>& labels);
  std::vector<std::vector<T>> logits_of(const std::vector<features::SpikeSpectrogram>& feats);
  nn::Tensor<T> to_tensor(const std::vector<features::SpikeSpectrogram>& feats) const;
  std::vector<nn::ParamRef<T>> model_refs();
  bool bank_trainable() const;

  TrainConfig cfg_;
  nn::Dscnn<T> model_;
  LearnableBank bank_;
  circuit::BankParams initial_bank_;
  nn::AdamW<T> model_opt_;
  nn::AdamW<double> bank_opt_;
  std::size_t epoch_ = 0;
};

extern template class Trainer<float>;
extern template class Trainer<double>;

}  // namespace learnafe::train
