#include "learnafe/train/run_config.hpp"

#include <filesystem>
#include <set>

#include "json.hpp"
#include "learnafe/io/atomic_file.hpp"
#include "learnafe/io/csv.hpp"

namespace learnafe::train {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw FormatError("config section '" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw FormatError("unknown config key '" + where + k + "'");
  }
}

template <class T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string snr_text(const std::vector<std::optional<double>>& snrs) {
  std::string s;
  for (std::size_t i = 0; i < snrs.size(); ++i) {
    if (i) s += ',';
    s += snrs[i] ? io::format_double(*snrs[i]) : "clean";
  }
  return s;
}

}  // namespace

std::vector<std::optional<double>> parse_snr_list(const std::string& text) {
  std::vector<std::optional<double>> out;
  for (const auto& f : io::split_fields(text)) {
    if (f == "clean" || f == "inf") {
      out.push_back(std::nullopt);
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(f, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != f.size() || !std::isfinite(v)) {
      throw DomainError("bad SNR entry '" + f + "' (expected numbers in dB or 'clean')");
    }
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("SNR list is empty");
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed config JSON: ") + e.what());
  }
  RunConfig c;
  auto& t = c.train;
  try {
    check_keys(j, "", {"seed", "mode", "epochs", "finetune_epochs", "batch_size", "decay", "exec",
                       "precision", "hyperparams", "features", "augment", "bank", "pdk", "model",
                       "data", "eval", "hyperopt", "transient", "simulator"});
    get(j, "seed", t.seed);
    if (j.contains("mode")) t.mode = parse_mode(j["mode"].get<std::string>());
    get(j, "epochs", t.epochs);
    get(j, "finetune_epochs", t.finetune_epochs);
    get(j, "batch_size", t.batch_size);
    if (j.contains("decay")) {
      const auto d = j["decay"].get<std::string>();
      if (d == "l2") t.decay_kind = nn::DecayKind::L2;
      else if (d == "l1") t.decay_kind = nn::DecayKind::L1;
      else throw FormatError("decay must be 'l2' or 'l1'");
    }
    if (j.contains("exec")) {
      const auto e = j["exec"].get<std::string>();
      if (e == "parallel") t.exec = Exec::Parallel;
      else if (e == "serial") t.exec = Exec::Serial;
      else throw FormatError("exec must be 'parallel' or 'serial'");
    }
    if (j.contains("precision") && j["precision"] != "float32") {
      throw FormatError("only float32 training is exposed through the config");
    }
    if (j.contains("hyperparams")) {
      const auto& h = j["hyperparams"];
      check_keys(h, "hyperparams.", {"lr", "l2", "lambda_ce", "lambda_i", "lambda_c"});
      get(h, "lr", t.hp.lr);
      get(h, "l2", t.hp.l2);
      get(h, "lambda_ce", t.hp.lambda_ce);
      get(h, "lambda_i", t.hp.lambda_i);
      get(h, "lambda_c", t.hp.lambda_c);
    }
    if (j.contains("features")) {
      const auto& f = j["features"];
      check_keys(f, "features.", {"frame_len", "theta", "spike_mode"});
      get(f, "frame_len", t.features.frame_len);
      get(f, "theta", t.features.theta);
      if (f.contains("spike_mode")) {
        const auto m = f["spike_mode"].get<std::string>();
        if (m == "continuous") t.features.mode = features::SpikeMode::Continuous;
        else if (m == "quantized") t.features.mode = features::SpikeMode::Quantized;
        else throw FormatError("spike_mode must be 'continuous' or 'quantized'");
      }
    }
    if (j.contains("augment")) {
      const auto& a = j["augment"];
      check_keys(a, "augment.", {"mix_probability", "snr_lo_db", "snr_hi_db"});
      get(a, "mix_probability", t.augment.mix_probability);
      get(a, "snr_lo_db", t.augment.snr_lo_db);
      get(a, "snr_hi_db", t.augment.snr_hi_db);
    }
    if (j.contains("bank")) {
      const auto& b = j["bank"];
      check_keys(b, "bank.", {"c1_f", "phi_i", "phi_c", "fc_first_hz", "current_ratio"});
      get(b, "c1_f", t.bank.c1);
      get(b, "phi_i", t.bank.phi_i);
      get(b, "phi_c", t.bank.phi_c);
      get(b, "fc_first_hz", t.bank.fc_first);
      get(b, "current_ratio", t.bank.current_ratio);
    }
    if (j.contains("pdk")) {
      const auto& p = j["pdk"];
      check_keys(p, "pdk.", {"nut_nmos_v", "nut_pmos_v", "vdd_v", "cap_density_ff_per_um2",
                             "cap_fringe_ff_per_um"});
      get(p, "nut_nmos_v", t.pdk.nut_nmos);
      get(p, "nut_pmos_v", t.pdk.nut_pmos);
      get(p, "vdd_v", t.pdk.vdd);
      get(p, "cap_density_ff_per_um2", t.pdk.cap_density);
      get(p, "cap_fringe_ff_per_um", t.pdk.cap_fringe);
    }
    if (j.contains("model")) {
      const auto& m = j["model"];
      check_keys(m, "model.", {"channels", "blocks", "stem_kh", "stem_kw", "stem_sh", "stem_sw",
                               "dw_k", "bn_momentum", "bn_eps"});
      get(m, "channels", t.model.channels);
      get(m, "blocks", t.model.blocks);
      get(m, "stem_kh", t.model.stem_kh);
      get(m, "stem_kw", t.model.stem_kw);
      get(m, "stem_sh", t.model.stem_sh);
      get(m, "stem_sw", t.model.stem_sw);
      get(m, "dw_k", t.model.dw_k);
      get(m, "bn_momentum", t.model.bn.momentum);
      get(m, "bn_eps", t.model.bn.eps);
    }
    if (j.contains("data")) {
      const auto& d = j["data"];
      check_keys(d, "data.", {"root", "noise_dir", "keywords", "synthetic"});
      get(d, "root", c.data_root);
      get(d, "noise_dir", c.noise_dir);
      get(d, "keywords", c.keywords);
      if (d.contains("synthetic")) {
        const auto& s = d["synthetic"];
        check_keys(s, "data.synthetic.", {"classes", "train_per_class", "val_per_class",
                                          "test_per_class", "clip_samples", "seed"});
        const data::ClassMap classes(c.keywords);
        if (s.contains("classes")) {
          c.synthetic.labels.clear();
          for (const auto& n : s["classes"]) {
            c.synthetic.labels.push_back(classes.id_of_name(n.get<std::string>()));
          }
        }
        get(s, "train_per_class", c.synthetic.train_per_class);
        get(s, "val_per_class", c.synthetic.val_per_class);
        get(s, "test_per_class", c.synthetic.test_per_class);
        get(s, "clip_samples", c.synthetic.clip_samples);
        get(s, "seed", c.synthetic.seed);
      }
    }
    if (j.contains("eval")) {
      check_keys(j["eval"], "eval.", {"snr_list"});
      if (j["eval"].contains("snr_list")) {
        c.snr_list = parse_snr_list(j["eval"]["snr_list"].get<std::string>());
      }
    }
    if (j.contains("hyperopt")) {
      const auto& h = j["hyperopt"];
      check_keys(h, "hyperopt.", {"trials", "init_trials", "trial_epochs"});
      get(h, "trials", c.trials);
      get(h, "init_trials", c.init_trials);
      get(h, "trial_epochs", c.trial_epochs);
    }
    if (j.contains("transient")) {
      check_keys(j["transient"], "transient.", {"oversample"});
      get(j["transient"], "oversample", c.oversample);
    }
    if (j.contains("simulator")) {
      check_keys(j["simulator"], "simulator.", {"command"});
      get(j["simulator"], "command", c.simulator_command);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("config has a value of the wrong type: ") + e.what());
  }
  t.hp.validate();
  t.pdk.validate();
  if (t.batch_size < 2) throw DomainError("batch_size must be at least 2");
  if (c.oversample == 0) throw DomainError("transient.oversample must be >= 1");
  if (c.init_trials == 0 || c.init_trials > c.trials) {
    throw DomainError("hyperopt needs 0 < init_trials <= trials");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(io::read_file(path));
}

std::string run_config_json(const RunConfig& c) {
  const auto& t = c.train;
  const data::ClassMap classes(c.keywords);
  json syn_classes = json::array();
  for (int id : c.synthetic.labels) syn_classes.push_back(classes.name(id));
  json j = {
      {"seed", t.seed},
      {"mode", std::string(mode_name(t.mode))},
      {"epochs", t.epochs},
      {"finetune_epochs", t.finetune_epochs},
      {"batch_size", t.batch_size},
      {"decay", t.decay_kind == nn::DecayKind::L2 ? "l2" : "l1"},
      {"exec", t.exec == Exec::Parallel ? "parallel" : "serial"},
      {"precision", "float32"},
      {"hyperparams",
       {{"lr", t.hp.lr},
        {"l2", t.hp.l2},
        {"lambda_ce", t.hp.lambda_ce},
        {"lambda_i", t.hp.lambda_i},
        {"lambda_c", t.hp.lambda_c}}},
      {"features",
       {{"frame_len", t.features.frame_len},
        {"theta", t.features.theta},
        {"spike_mode",
         t.features.mode == features::SpikeMode::Continuous ? "continuous" : "quantized"}}},
      {"augment",
       {{"mix_probability", t.augment.mix_probability},
        {"snr_lo_db", t.augment.snr_lo_db},
        {"snr_hi_db", t.augment.snr_hi_db}}},
      {"bank",
       {{"c1_f", t.bank.c1},
        {"phi_i", t.bank.phi_i},
        {"phi_c", t.bank.phi_c},
        {"fc_first_hz", t.bank.fc_first},
        {"current_ratio", t.bank.current_ratio}}},
      {"pdk",
       {{"nut_nmos_v", t.pdk.nut_nmos},
        {"nut_pmos_v", t.pdk.nut_pmos},
        {"vdd_v", t.pdk.vdd},
        {"cap_density_ff_per_um2", t.pdk.cap_density},
        {"cap_fringe_ff_per_um", t.pdk.cap_fringe}}},
      {"model",
       {{"channels", t.model.channels},
        {"blocks", t.model.blocks},
        {"stem_kh", t.model.stem_kh},
        {"stem_kw", t.model.stem_kw},
        {"stem_sh", t.model.stem_sh},
        {"stem_sw", t.model.stem_sw},
        {"dw_k", t.model.dw_k},
        {"bn_momentum", t.model.bn.momentum},
        {"bn_eps", t.model.bn.eps}}},
      {"data",
       {{"root", c.data_root},
        {"noise_dir", c.noise_dir},
        {"keywords", c.keywords},
        {"synthetic",
         {{"classes", syn_classes},
          {"train_per_class", c.synthetic.train_per_class},
          {"val_per_class", c.synthetic.val_per_class},
          {"test_per_class", c.synthetic.test_per_class},
          {"clip_samples", c.synthetic.clip_samples},
          {"seed", c.synthetic.seed}}}}},
      {"eval", {{"snr_list", snr_text(c.snr_list)}}},
      {"hyperopt",
       {{"trials", c.trials}, {"init_trials", c.init_trials}, {"trial_epochs", c.trial_epochs}}},
      {"transient", {{"oversample", c.oversample}}},
      {"simulator", {{"command", c.simulator_command}}}};
  return j.dump(2) + "\n";
}

Datasets open_datasets(const RunConfig& cfg, const std::string& manifest_cache) {
  namespace fs = std::filesystem;
  Datasets d{data::ClassMap(cfg.keywords), nullptr, nullptr, nullptr};
  const std::uint64_t seed = cfg.train.seed;
  if (cfg.data_root.empty()) {
    throw FormatError("no dataset given: pass --data-root, set LEARNAFE_DATA_ROOT, or use "
                      "'synthetic'.\n" + data::expected_layout("<root>"));
  }
  if (cfg.data_root == "synthetic") {
    auto noise = data::NoiseBank::synthetic(derive_seed(cfg.synthetic.seed, 0x0153));
    d.train = std::make_unique<data::SyntheticToneSource>(cfg.synthetic, data::Split::Train, noise);
    d.validation =
        std::make_unique<data::SyntheticToneSource>(cfg.synthetic, data::Split::Validation, noise);
    d.test = std::make_unique<data::SyntheticToneSource>(cfg.synthetic, data::Split::Test, noise);
    return d;
  }
  if (!fs::is_directory(cfg.data_root)) {
    throw FormatError("dataset root '" + cfg.data_root + "' does not exist.\n" +
                      data::expected_layout(cfg.data_root));
  }
  const std::string noise_dir = cfg.noise_dir.empty()
                                    ? (fs::path(cfg.data_root) / "_background_noise_").string()
                                    : cfg.noise_dir;
  if (!fs::is_directory(noise_dir)) {
    throw FormatError("noise directory '" + noise_dir + "' is missing.\n" +
                      data::expected_layout(cfg.data_root));
  }
  const auto noise = data::NoiseBank::load_directory(noise_dir);
  const auto manifest = data::load_or_build_manifest(cfg.data_root, manifest_cache, d.classes);
  d.train = std::make_unique<data::CorpusSource>(cfg.data_root, manifest, data::Split::Train,
                                                 noise, seed);
  d.validation = std::make_unique<data::CorpusSource>(cfg.data_root, manifest,
                                                      data::Split::Validation, noise, seed);
  d.test = std::make_unique<data::CorpusSource>(cfg.data_root, manifest, data::Split::Test,
                                                noise, seed);
  return d;
}

}  // namespace learnafe::train
