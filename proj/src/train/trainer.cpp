#include "learnafe/train/trainer.hpp"

#include <cmath>
#include <future>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "learnafe/io/atomic_file.hpp"
#include "learnafe/io/csv.hpp"

namespace learnafe::train {

using circuit::BankParams;
using features::SpikeSpectrogram;
using filterbank::ChannelGrad;

void Hyperparams::validate() const {
  if (!(lr > 0) || !(lambda_ce > 0)) throw DomainError("lr and lambda_ce must be positive");
  if (!(l2 >= 0) || !(lambda_i >= 0) || !(lambda_c >= 0)) {
    throw DomainError("l2, lambda_i and lambda_c must be non-negative");
  }
  if (!std::isfinite(lr + l2 + lambda_ce + lambda_i + lambda_c)) {
    throw DomainError("hyperparameters must be finite");
  }
}

std::string_view mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::Codesign: return "codesign";
    case TrainMode::FixedAfe: return "fixed-afe";
    case TrainMode::DirectCircuit: return "direct-circuit-values";
    case TrainMode::Finetune: return "finetune";
  }
  return "codesign";
}

TrainMode parse_mode(std::string_view s) {
  if (s == "codesign") return TrainMode::Codesign;
  if (s == "fixed-afe") return TrainMode::FixedAfe;
  if (s == "direct-circuit-values" || s == "direct") return TrainMode::DirectCircuit;
  if (s == "finetune") return TrainMode::Finetune;
  throw DomainError("unknown mode '" + std::string(s) +
                    "' (expected codesign|fixed-afe|direct-circuit-values|finetune)");
}

LossBreakdown codesign_loss(double l_ce, const BankParams& bank, const Hyperparams& hp) {
  LossBreakdown l;
  l.l_ce = l_ce;
  for (const auto& ch : bank.channels) {
    l.l_p += ch.phi_i;
    l.l_a += ch.phi_c;
  }
  l.l_total = hp.lambda_ce * l.l_ce + hp.lambda_i * l.l_p + hp.lambda_c * l.l_a;
  return l;
}

void write_epoch_header(std::ostream& out) {
  out << "epoch,train_acc,val_acc,l_ce,l_p,l_a,power_nw,area_mm2\n";
}

void write_epoch_row(std::ostream& out, const EpochReport& r) {
  using io::format_double;
  out << r.epoch << ',' << format_double(r.train_acc) << ',' << format_double(r.val_acc) << ','
      << format_double(r.loss.l_ce) << ',' << format_double(r.loss.l_p) << ','
      << format_double(r.loss.l_a) << ',' << format_double(r.power_w * 1e9) << ','
      << format_double(r.area_mm2) << '\n';
}

HardwareReport report_hardware(const BankParams& bank, const BankParams& baseline) {
  bank.validate();
  HardwareReport r;
  const auto p = circuit::estimate_power(bank);
  r.power_w = p.total;
  r.channel_power_w = p.per_channel;
  r.area_mm2 = circuit::estimate_cap_area(bank);
  r.baseline_power_w = circuit::estimate_power(baseline).total;
  r.baseline_area_mm2 = circuit::estimate_cap_area(baseline);
  r.power_change_pct = 100.0 * (r.power_w - r.baseline_power_w) / r.baseline_power_w;
  r.area_change_pct = 100.0 * (r.area_mm2 - r.baseline_area_mm2) / r.baseline_area_mm2;
  for (const auto& ch : bank.channels) {
    r.channels.push_back(circuit::derive_response(ch, bank.pdk));
    r.phi_i.push_back(ch.phi_i);
    r.phi_c.push_back(ch.phi_c);
  }
  return r;
}

void write_hardware_csv(std::ostream& out, const HardwareReport& r) {
  using io::format_double;
  out << "channel,fc_hz,q,gain,gain_db,phi_i,phi_c,power_nw\n";
  for (std::size_t k = 0; k < r.channels.size(); ++k) {
    const auto& c = r.channels[k];
    out << k + 1 << ',' << format_double(c.fc) << ',' << format_double(c.q) << ','
        << format_double(c.a) << ',' << format_double(20.0 * std::log10(c.a)) << ','
        << format_double(r.phi_i[k]) << ',' << format_double(r.phi_c[k]) << ','
        << format_double(r.channel_power_w[k] * 1e9) << '\n';
  }
}

std::string hardware_json(const HardwareReport& r) {
  nlohmann::json j;
  j["power_nw"] = r.power_w * 1e9;
  j["area_mm2"] = r.area_mm2;
  j["baseline_power_nw"] = r.baseline_power_w * 1e9;
  j["baseline_area_mm2"] = r.baseline_area_mm2;
  j["power_change_pct"] = r.power_change_pct;
  j["area_change_pct"] = r.area_change_pct;
  double sum_i = 0, sum_c = 0;
  for (double v : r.phi_i) sum_i += v;
  for (double v : r.phi_c) sum_c += v;
  j["sum_phi_i"] = sum_i;
  j["sum_phi_c"] = sum_c;
  return j.dump(2) + "\n";
}

void write_snr_csv(std::ostream& out, const std::vector<SnrAccuracy>& rows) {
  out << "snr_db,accuracy\n";
  for (const auto& r : rows) {
    out << (std::isinf(r.snr_db) ? std::string("clean") : io::format_double(r.snr_db)) << ','
        << io::format_double(r.accuracy) << '\n';
  }
}

namespace {

// Batches of `size`, with a trailing single item merged into the previous
// batch so batch norm always sees at least two samples.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order,
                                                   std::size_t size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += size) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + size)));
  }
  if (out.size() > 1 && out.back().size() < 2) {
    out[out.size() - 2].insert(out[out.size() - 2].end(), out.back().begin(), out.back().end());
    out.pop_back();
  }
  return out;
}

}  // namespace

template <class T>
Trainer<T>::Trainer(const TrainConfig& cfg)
    : cfg_(cfg), model_(cfg.model, derive_seed(cfg.seed, 0x30de1)) {
  cfg_.hp.validate();
  if (cfg_.batch_size < 2) throw DomainError("batch size must be at least 2");
  initial_bank_ = circuit::init_bank(cfg_.bank, cfg_.pdk);
  bank_ = LearnableBank(initial_bank_, cfg_.mode == TrainMode::DirectCircuit
                                           ? Parameterization::Direct
                                           : Parameterization::Ratio);
  nn::AdamConfig mc;
  mc.lr = cfg_.hp.lr;
  mc.weight_decay = cfg_.hp.l2;
  mc.decay_kind = cfg_.decay_kind;
  model_opt_ = nn::AdamW<T>(mc);
  nn::AdamConfig bc;
  bc.lr = cfg_.hp.lr;
  bank_opt_ = nn::AdamW<double>(bc);
}

template <class T>
void Trainer<T>::set_mode(TrainMode m) {
  if (m == TrainMode::DirectCircuit && bank_.parameterization() != Parameterization::Direct) {
    throw ModeError("direct-circuit mode must be selected when the trainer is constructed");
  }
  cfg_.mode = m;
  model_.set_trainable(true);
}

template <class T>
bool Trainer<T>::bank_trainable() const {
  return cfg_.mode == TrainMode::Codesign || cfg_.mode == TrainMode::DirectCircuit;
}

template <class T>
std::vector<nn::ParamRef<T>> Trainer<T>::model_refs() {
  std::vector<nn::ParamRef<T>> refs;
  for (auto& p : model_.parameters()) {
    refs.push_back({p.value.data, p.value.grad, p.decay, p.trainable});
  }
  return refs;
}

template <class T>
nn::Tensor<T> Trainer<T>::to_tensor(const std::vector<SpikeSpectrogram>& feats) const {
  if (feats.empty()) throw DomainError("empty batch");
  const std::size_t c = feats[0].values.rows(), f = feats[0].values.cols();
  nn::Tensor<T> x({feats.size(), 1, c, f});
  for (std::size_t i = 0; i < feats.size(); ++i) {
    if (feats[i].values.rows() != c || feats[i].values.cols() != f) {
      throw DomainError("spectrograms in a batch must share one shape");
    }
    const auto& v = feats[i].values.data();
    std::transform(v.begin(), v.end(), x.data.begin() + static_cast<std::ptrdiff_t>(i * c * f),
                   [](double d) { return static_cast<T>(d); });
  }
  return x;
}

template <class T>
void Trainer<T>::step_bank(const std::vector<double>& grad) {
  if (!bank_trainable()) {
    throw ContractViolation(std::string("bank parameters are frozen in ") +
                            std::string(mode_name(cfg_.mode)) + " mode");
  }
  bank_opt_.step({{bank_.values(), grad, false, true}});
  bank_.project();
}

template <class T>
typename Trainer<T>::BatchGrad Trainer<T>::batch_gradient(
    const std::vector<std::vector<double>>& waves, const std::vector<int>& labels,
    bool training_bn) {
  if (waves.size() != labels.size() || waves.empty()) {
    throw DomainError("need one label per waveform");
  }
  const BankParams bank = bank_.params();
  const std::size_t n = waves.size();
  std::vector<FrontendCache> caches(n);
  std::vector<SpikeSpectrogram> feats(n);
  for (std::size_t i = 0; i < n; ++i) {
    feats[i] = frontend_forward(bank, waves[i], cfg_.features, &caches[i]);
  }
  const auto logits = model_.forward(to_tensor(feats), training_bn, cfg_.exec);
  nn::Tensor<T> dlogits;
  const double l_ce = nn::softmax_cross_entropy_batch(logits, labels, dlogits);
  for (auto& v : dlogits.data) v = static_cast<T>(v * cfg_.hp.lambda_ce);
  const auto dx = model_.backward(dlogits, cfg_.exec);
  const std::size_t rows = feats[0].values.rows(), cols = feats[0].values.cols();
  std::vector<ChannelGrad> total(rows);
  for (std::size_t i = 0; i < n; ++i) {
    Array2D<double> dspec(rows, cols);
    for (std::size_t t = 0; t < rows * cols; ++t) dspec.data()[t] = dx.data[i * rows * cols + t];
    const auto g = frontend_backward(bank, caches[i], dspec, cfg_.features);
    for (std::size_t c = 0; c < rows; ++c) total[c] += g[c];
  }
  return {codesign_loss(l_ce, bank, cfg_.hp),
          bank_.gradient(total, cfg_.hp.lambda_i, cfg_.hp.lambda_c)};
}

template <class T>
typename Trainer<T>::StepResult Trainer<T>::step(const std::vector<data::Clip>& clips) {
  const std::size_t n = clips.size();
  const BankParams bank = bank_.params();
  for (const auto& ch : bank.channels) ch.validate();
  const bool train_bank = bank_trainable();
  std::vector<FrontendCache> caches(train_bank ? n : 0);
  std::vector<SpikeSpectrogram> feats(n);
  std::vector<int> labels(n);
  ExceptionSlot err;
  const auto nn_ = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) if (cfg_.exec == Exec::Parallel)
  for (std::ptrdiff_t k = 0; k < nn_; ++k) {
    try {
      const auto i = static_cast<std::size_t>(k);
      feats[i] = frontend_forward(bank, clips[i].samples, cfg_.features,
                                  train_bank ? &caches[i] : nullptr);
      labels[i] = clips[i].label;
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow();

  const auto logits = model_.forward(to_tensor(feats), true, cfg_.exec);
  nn::Tensor<T> dlogits;
  const double l_ce = nn::softmax_cross_entropy_batch(logits, labels, dlogits);
  if (!std::isfinite(l_ce)) {
    throw DivergenceError("non-finite cross-entropy at epoch " + std::to_string(epoch_));
  }
  StepResult res;
  res.loss = codesign_loss(l_ce, bank, cfg_.hp);
  const std::size_t k = logits.shape[1];
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const T> row(logits.data.data() + i * k, k);
    if (static_cast<int>(nn::argmax(row)) == labels[i]) ++res.correct;
  }

  for (auto& v : dlogits.data) v = static_cast<T>(v * cfg_.hp.lambda_ce);
  const auto dx = model_.backward(dlogits, cfg_.exec);
  model_opt_.step(model_refs());

  if (train_bank) {
    const std::size_t rows = feats[0].values.rows(), cols = feats[0].values.cols();
    std::vector<std::vector<ChannelGrad>> per_clip(n);
#pragma omp parallel for schedule(dynamic) if (cfg_.exec == Exec::Parallel)
    for (std::ptrdiff_t q = 0; q < nn_; ++q) {
      try {
        const auto i = static_cast<std::size_t>(q);
        Array2D<double> dspec(rows, cols);
        for (std::size_t t = 0; t < rows * cols; ++t) {
          dspec.data()[t] = dx.data[i * rows * cols + t];
        }
        per_clip[i] = frontend_backward(bank, caches[i], dspec, cfg_.features);
      } catch (...) {
        err.capture();
      }
    }
    err.rethrow();
    std::vector<ChannelGrad> total(rows);
    for (const auto& g : per_clip) {
      for (std::size_t c = 0; c < rows; ++c) total[c] += g[c];
    }
    const auto grad = bank_.gradient(total, cfg_.hp.lambda_i, cfg_.hp.lambda_c);
    for (double v : grad) {
      if (!std::isfinite(v)) throw DivergenceError("non-finite front-end gradient");
    }
    step_bank(grad);
  }
  return res;
}

template <class T>
typename Trainer<T>::StepResult Trainer<T>::step_features(const std::vector<SpikeSpectrogram>& feats,
                                                          const std::vector<int>& labels) {
  const auto logits = model_.forward(to_tensor(feats), true, cfg_.exec);
  nn::Tensor<T> dlogits;
  const double l_ce = nn::softmax_cross_entropy_batch(logits, labels, dlogits);
  if (!std::isfinite(l_ce)) {
    throw DivergenceError("non-finite cross-entropy during finetuning");
  }
  StepResult res;
  res.loss = codesign_loss(l_ce, bank_.params(), cfg_.hp);
  res.loss.l_total = l_ce;  // cross-entropy only
  const std::size_t k = logits.shape[1];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::span<const T> row(logits.data.data() + i * k, k);
    if (static_cast<int>(nn::argmax(row)) == labels[i]) ++res.correct;
  }
  model_.backward(dlogits, cfg_.exec);
  model_opt_.step(model_refs());
  return res;
}

template <class T>
EpochReport Trainer<T>::train_epoch(const data::ClipSource& train, const data::ClipSource* val) {
  if (cfg_.mode == TrainMode::Finetune) {
    throw ModeError("finetune mode trains on fixed features; call finetune()");
  }
  if (train.size() < 2) throw DomainError("training set needs at least two clips");
  const auto batches = make_batches(data::epoch_order(train.size(), cfg_.seed, epoch_),
                                    cfg_.batch_size);
  const std::uint64_t epoch_seed = derive_seed(cfg_.seed, 0x7a1, epoch_);
  auto load = [&](std::size_t b) {
    std::vector<data::Clip> clips;
    for (std::size_t i : batches[b]) {
      clips.push_back(data::training_clip(train, i, derive_seed(epoch_seed, i), cfg_.augment));
    }
    return clips;
  };

  EpochReport rep;
  std::size_t correct = 0, seen = 0;
  // the next batch is loaded while the current one trains
  std::future<std::vector<data::Clip>> next = std::async(std::launch::async, load, 0);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    std::vector<data::Clip> clips = next.get();
    if (b + 1 < batches.size()) next = std::async(std::launch::async, load, b + 1);
    const StepResult r = step(clips);
    correct += r.correct;
    seen += clips.size();
    rep.loss.l_ce += r.loss.l_ce;
    rep.loss.l_p += r.loss.l_p;
    rep.loss.l_a += r.loss.l_a;
    rep.loss.l_total += r.loss.l_total;
  }
  const double nb = static_cast<double>(batches.size());
  rep.loss.l_ce /= nb;
  rep.loss.l_p /= nb;
  rep.loss.l_a /= nb;
  rep.loss.l_total /= nb;
  rep.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
  ++epoch_;
  rep.epoch = epoch_;
  const BankParams bank = bank_.params();
  if (val) {
    IdealFeatureSource vs(*val, bank, cfg_.features, ClipProtocol::Train,
                          derive_seed(cfg_.seed, 0x7a1d), std::nullopt, cfg_.augment);
    rep.val_acc = accuracy(vs, 0);
  }
  rep.power_w = circuit::estimate_power(bank).total;
  rep.area_mm2 = circuit::estimate_cap_area(bank);
  return rep;
}

template <class T>
std::vector<EpochReport> Trainer<T>::fit(const data::ClipSource& train,
                                         const data::ClipSource* val, std::size_t epochs,
                                         const std::function<void(const EpochReport&)>& on_epoch) {
  std::vector<EpochReport> out;
  for (std::size_t e = 0; e < epochs; ++e) {
    out.push_back(train_epoch(train, val));
    if (on_epoch) on_epoch(out.back());
  }
  return out;
}

template <class T>
std::vector<EpochReport> Trainer<T>::finetune(const FeatureSource& train,
                                              const FeatureSource* val, std::size_t epochs) {
  set_mode(TrainMode::Finetune);
  if (train.size() < 2) throw DomainError("finetuning needs at least two items");
  std::vector<EpochReport> out;
  const BankParams bank = bank_.params();
  for (std::size_t e = 0; e < epochs; ++e) {
    const auto batches = make_batches(data::epoch_order(train.size(), cfg_.seed, epoch_),
                                      cfg_.batch_size);
    EpochReport rep;
    std::size_t correct = 0, seen = 0;
    for (const auto& batch : batches) {
      std::vector<SpikeSpectrogram> feats(batch.size());
      std::vector<int> labels(batch.size());
      ExceptionSlot err;
      const auto nb = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(dynamic) if (cfg_.exec == Exec::Parallel)
      for (std::ptrdiff_t k = 0; k < nb; ++k) {
        try {
          feats[k] = train.features(batch[k], epoch_);
          labels[k] = train.label(batch[k]);
        } catch (...) {
          err.capture();
        }
      }
      err.rethrow();
      const StepResult r = step_features(feats, labels);
      correct += r.correct;
      seen += batch.size();
      rep.loss.l_ce += r.loss.l_ce;
      rep.loss.l_p += r.loss.l_p;
      rep.loss.l_a += r.loss.l_a;
      rep.loss.l_total += r.loss.l_total;
    }
    const double nb = static_cast<double>(batches.size());
    rep.loss.l_ce /= nb;
    rep.loss.l_p /= nb;
    rep.loss.l_a /= nb;
    rep.loss.l_total /= nb;
    rep.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    ++epoch_;
    rep.epoch = epoch_;
    if (val) rep.val_acc = accuracy(*val, 0);
    rep.power_w = circuit::estimate_power(bank).total;
    rep.area_mm2 = circuit::estimate_cap_area(bank);
    out.push_back(rep);
  }
  return out;
}

template <class T>
std::vector<std::vector<T>> Trainer<T>::logits_of(const std::vector<SpikeSpectrogram>& feats) {
  const auto logits = model_.forward(to_tensor(feats), false, cfg_.exec);
  const std::size_t k = logits.shape[1];
  std::vector<std::vector<T>> out(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    out[i].assign(logits.data.begin() + static_cast<std::ptrdiff_t>(i * k),
                  logits.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * k));
  }
  return out;
}

template <class T>
double Trainer<T>::accuracy(const FeatureSource& src, std::size_t epoch) {
  if (src.size() == 0) throw DomainError("cannot evaluate an empty set");
  std::size_t correct = 0;
  for (std::size_t start = 0; start < src.size(); start += cfg_.batch_size) {
    const std::size_t end = std::min(src.size(), start + cfg_.batch_size);
    std::vector<SpikeSpectrogram> feats(end - start);
    ExceptionSlot err;
    const auto nb = static_cast<std::ptrdiff_t>(end - start);
#pragma omp parallel for schedule(dynamic) if (cfg_.exec == Exec::Parallel)
    for (std::ptrdiff_t k = 0; k < nb; ++k) {
      try {
        feats[k] = src.features(start + static_cast<std::size_t>(k), epoch);
      } catch (...) {
        err.capture();
      }
    }
    err.rethrow();
    const auto logits = logits_of(feats);
    for (std::size_t i = 0; i < feats.size(); ++i) {
      if (static_cast<int>(nn::argmax<T>(logits[i])) == src.label(start + i)) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(src.size());
}

template <class T>
std::vector<SnrAccuracy> Trainer<T>::evaluate(const data::ClipSource& test,
                                              const std::vector<std::optional<double>>& snrs) {
  const BankParams bank = bank_.params();
  std::vector<SnrAccuracy> out;
  for (const auto& snr : snrs) {
    IdealFeatureSource src(test, bank, cfg_.features, ClipProtocol::Eval,
                           derive_seed(cfg_.seed, 0xe7a1), snr);
    out.push_back({snr ? *snr : std::numeric_limits<double>::infinity(), accuracy(src)});
  }
  return out;
}

// ---------------------------------------------------------------- checkpoint

namespace {

constexpr int kCheckpointVersion = 1;

template <class V>
nlohmann::json vec_json(const V& v) {
  nlohmann::json a = nlohmann::json::array();
  for (auto x : v) a.push_back(static_cast<double>(x));
  return a;
}

template <class T>
void fill_from(const nlohmann::json& a, std::vector<T>& out, const std::string& what) {
  if (!a.is_array() || a.size() != out.size()) {
    throw FormatError("checkpoint entry '" + what + "' has the wrong size");
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(a[i].get<double>());
}

nlohmann::json adam_json(std::int64_t steps, const std::vector<std::vector<double>>& m,
                         const std::vector<std::vector<double>>& v) {
  nlohmann::json j;
  j["steps"] = steps;
  j["m"] = nlohmann::json::array();
  j["v"] = nlohmann::json::array();
  for (const auto& x : m) j["m"].push_back(vec_json(x));
  for (const auto& x : v) j["v"].push_back(vec_json(x));
  return j;
}

template <class A>
void adam_from(const nlohmann::json& j, A& opt) {
  opt.set_steps(j.at("steps").get<std::int64_t>());
  auto& m = opt.first_moments();
  auto& v = opt.second_moments();
  m.clear();
  v.clear();
  for (const auto& x : j.at("m")) m.push_back(x.get<std::vector<double>>());
  for (const auto& x : j.at("v")) v.push_back(x.get<std::vector<double>>());
}

}  // namespace

template <class T>
std::string Trainer<T>::checkpoint_text() const {
  using nlohmann::json;
  json j;
  j["format"] = "learnafe-checkpoint";
  j["version"] = kCheckpointVersion;
  j["precision"] = sizeof(T) == 4 ? "float32" : "float64";
  j["epoch"] = epoch_;
  j["mode"] = std::string(mode_name(cfg_.mode));
  j["seed"] = cfg_.seed;
  const auto& mc = model_.config();
  j["model"] = {{"in_h", mc.in_h},       {"channels", mc.channels}, {"blocks", mc.blocks},
                {"stem_kh", mc.stem_kh}, {"stem_kw", mc.stem_kw},   {"stem_sh", mc.stem_sh},
                {"stem_sw", mc.stem_sw}, {"dw_k", mc.dw_k},         {"classes", mc.classes}};
  j["features"] = {{"frame_len", cfg_.features.frame_len}, {"theta", cfg_.features.theta}};
  j["hyperparams"] = {{"lr", cfg_.hp.lr},
                      {"l2", cfg_.hp.l2},
                      {"lambda_ce", cfg_.hp.lambda_ce},
                      {"lambda_i", cfg_.hp.lambda_i},
                      {"lambda_c", cfg_.hp.lambda_c}};
  json tensors = json::object();
  for (const auto& p : model_.parameters()) {
    tensors[p.name] = {{"shape", p.value.shape}, {"data", vec_json(p.value.data)}};
  }
  j["tensors"] = tensors;
  json buffers = json::object();
  for (auto& [name, buf] : const_cast<nn::Dscnn<T>&>(model_).buffers()) buffers[name] = vec_json(*buf);
  j["buffers"] = buffers;
  const BankParams bank = bank_.params();
  json chans = json::array();
  for (const auto& ch : bank.channels) {
    chans.push_back({{"i2_a", ch.i2_base}, {"c1_f", ch.c1_base}, {"phi_i", ch.phi_i}, {"phi_c", ch.phi_c}});
  }
  json init = json::array();
  for (const auto& ch : initial_bank_.channels) {
    init.push_back({{"i2_a", ch.i2_base}, {"c1_f", ch.c1_base}, {"phi_i", ch.phi_i}, {"phi_c", ch.phi_c}});
  }
  j["bank"] = {{"parameterization", std::string(parameterization_name(bank_.parameterization()))},
               {"values", vec_json(bank_.values())},
               {"channels", chans},
               {"initial_channels", init},
               {"pdk",
                {{"nut_nmos_v", bank.pdk.nut_nmos},
                 {"nut_pmos_v", bank.pdk.nut_pmos},
                 {"vdd_v", bank.pdk.vdd},
                 {"cap_density_ff_per_um2", bank.pdk.cap_density},
                 {"cap_fringe_ff_per_um", bank.pdk.cap_fringe}}}};
  auto& mo = const_cast<nn::AdamW<T>&>(model_opt_);
  auto& bo = const_cast<nn::AdamW<double>&>(bank_opt_);
  j["optimizer"] = {{"model", adam_json(mo.steps(), mo.first_moments(), mo.second_moments())},
                    {"bank", adam_json(bo.steps(), bo.first_moments(), bo.second_moments())}};
  return j.dump() + "\n";
}

template <class T>
void Trainer<T>::load_checkpoint_text(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
  try {
    if (j.at("format") != "learnafe-checkpoint") throw FormatError("not a learnafe checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + j.at("version").dump());
    }
    const auto& m = j.at("model");
    const auto& mc = model_.config();
    if (m.at("channels").get<std::size_t>() != mc.channels ||
        m.at("blocks").get<std::size_t>() != mc.blocks ||
        m.at("stem_kw").get<std::size_t>() != mc.stem_kw ||
        m.at("classes").get<std::size_t>() != mc.classes) {
      throw FormatError("checkpoint model dimensions differ from the configured model");
    }
    const auto& tensors = j.at("tensors");
    for (auto& p : model_.parameters()) {
      const auto& t = tensors.at(p.name);
      if (t.at("shape").template get<std::vector<std::size_t>>() != p.value.shape) {
        throw FormatError("shape mismatch for tensor " + p.name);
      }
      fill_from(t.at("data"), p.value.data, p.name);
    }
    for (auto& [name, buf] : model_.buffers()) fill_from(j.at("buffers").at(name), *buf, name);

    const auto& b = j.at("bank");
    const std::string kind = b.at("parameterization").get<std::string>();
    if (kind != parameterization_name(bank_.parameterization())) {
      throw FormatError("checkpoint bank parameterization '" + kind + "' does not match mode");
    }
    BankParams init;
    const auto& pdk = b.at("pdk");
    init.pdk.nut_nmos = pdk.at("nut_nmos_v").get<double>();
    init.pdk.nut_pmos = pdk.at("nut_pmos_v").get<double>();
    init.pdk.vdd = pdk.at("vdd_v").get<double>();
    init.pdk.cap_density = pdk.at("cap_density_ff_per_um2").get<double>();
    init.pdk.cap_fringe = pdk.at("cap_fringe_ff_per_um").get<double>();
    for (const auto& c : b.at("initial_channels")) {
      init.channels.push_back({c.at("i2_a").get<double>(), c.at("c1_f").get<double>(),
                               c.at("phi_i").get<double>(), c.at("phi_c").get<double>()});
    }
    initial_bank_ = init;
    bank_ = LearnableBank(init, bank_.parameterization());
    fill_from(b.at("values"), bank_.values(), "bank.values");

    adam_from(j.at("optimizer").at("model"), model_opt_);
    adam_from(j.at("optimizer").at("bank"), bank_opt_);
    epoch_ = j.at("epoch").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint is missing fields: ") + e.what());
  }
}

template <class T>
void Trainer<T>::save_checkpoint(const std::string& path) const {
  io::write_file_atomic(path, checkpoint_text());
}

template <class T>
void Trainer<T>::load_checkpoint(const std::string& path) {
  load_checkpoint_text(io::read_file(path));
}

template class Trainer<float>;
template class Trainer<double>;

}  // namespace learnafe::train
