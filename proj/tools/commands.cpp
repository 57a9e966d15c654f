#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "learnafe/data/wav.hpp"
#include "learnafe/features.hpp"
#include "learnafe/filterbank.hpp"
#include "learnafe/hyperopt/search.hpp"
#include "learnafe/io/atomic_file.hpp"
#include "learnafe/io/csv.hpp"
#include "learnafe/io/spice.hpp"
#include "learnafe/io/svg.hpp"
#include "learnafe/train/run_config.hpp"

namespace learnafe::cli {

namespace fs = std::filesystem;
using train::RunConfig;
using Model = train::Trainer<float>;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string data_root;
  std::string out = "out";
  std::string mode;
  std::string snr_list;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> epochs;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--data-root", c.data_root,
                  "speech-commands root or 'synthetic' (env LEARNAFE_DATA_ROOT)");
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--mode", c.mode, "codesign | fixed-afe | direct-circuit-values | finetune");
  app->add_option("--snr-list", c.snr_list, "comma-separated dB values and/or 'clean'");
  app->add_option("--trials", c.trials, "hyperparameter-search trials");
  app->add_option("--epochs", c.epochs, "training epochs");
}

RunConfig resolve(const Common& c) {
  RunConfig rc = c.config.empty() ? RunConfig{} : train::load_run_config(c.config);
  if (const char* env = std::getenv("LEARNAFE_DATA_ROOT"); env && *env) rc.data_root = env;
  if (!c.data_root.empty()) rc.data_root = c.data_root;
  if (c.seed) rc.train.seed = *c.seed;
  if (!c.mode.empty()) rc.train.mode = train::parse_mode(c.mode);
  if (!c.snr_list.empty()) rc.snr_list = train::parse_snr_list(c.snr_list);
  if (c.trials) {
    rc.trials = *c.trials;
    rc.init_trials = std::min(rc.init_trials, rc.trials);
  }
  return rc;
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

template <class F>
std::string render(F&& f) {
  std::ostringstream s;
  f(s);
  return s.str();
}

// Builds a trainer whose architecture, feature settings and bank
// parameterization follow the checkpoint, then restores it.
std::unique_ptr<Model> trainer_from_checkpoint(RunConfig& rc, const std::string& path) {
  if (!fs::is_regular_file(path)) {
    throw StateError("checkpoint '" + path + "' not found; run the train command first");
  }
  const std::string text = io::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto& m = j.at("model");
    auto& mc = rc.train.model;
    mc.channels = m.at("channels").get<std::size_t>();
    mc.blocks = m.at("blocks").get<std::size_t>();
    mc.stem_kh = m.at("stem_kh").get<std::size_t>();
    mc.stem_kw = m.at("stem_kw").get<std::size_t>();
    mc.stem_sh = m.at("stem_sh").get<std::size_t>();
    mc.stem_sw = m.at("stem_sw").get<std::size_t>();
    mc.dw_k = m.at("dw_k").get<std::size_t>();
    rc.train.features.frame_len = j.at("features").at("frame_len").get<std::size_t>();
    rc.train.features.theta = j.at("features").at("theta").get<double>();
    const bool direct = j.at("bank").at("parameterization").get<std::string>() ==
                        train::parameterization_name(train::Parameterization::Direct);
    rc.train.mode = direct ? train::TrainMode::DirectCircuit : train::TrainMode::Codesign;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint '" + path + "' is not readable: " + e.what());
  }
  auto t = std::make_unique<Model>(rc.train);
  t->load_checkpoint_text(text);
  return t;
}

circuit::BankParams bank_for(RunConfig& rc, const std::string& checkpoint) {
  if (checkpoint.empty()) return circuit::init_bank(rc.train.bank, rc.train.pdk);
  return trainer_from_checkpoint(rc, checkpoint)->bank();
}

void write_hardware(const std::string& out, const circuit::BankParams& bank,
                    const circuit::BankParams& baseline) {
  const auto hw = train::report_hardware(bank, baseline);
  io::write_file_atomic(path_in(out, "hardware.csv"),
                        render([&](std::ostream& s) { train::write_hardware_csv(s, hw); }));
  io::write_file_atomic(path_in(out, "hardware.json"), train::hardware_json(hw));
}

std::string epochs_csv(const std::vector<train::EpochReport>& reps) {
  return render([&](std::ostream& s) {
    train::write_epoch_header(s);
    for (const auto& r : reps) train::write_epoch_row(s, r);
  });
}

void write_ac(const std::string& out, const circuit::BankParams& bank) {
  const auto table = filterbank::ac_response(bank, 10.0, 10000.0, 20);
  io::write_file_atomic(path_in(out, "ac_response.csv"),
                        render([&](std::ostream& s) { filterbank::write_ac_csv(table, s); }));
}

// ------------------------------------------------------------------ commands

int cmd_train(const Common& c, std::ostream& out) {
  RunConfig rc = resolve(c);
  if (rc.train.mode == train::TrainMode::Finetune) {
    throw ModeError("finetune mode needs a stage-1 checkpoint; use the finetune command");
  }
  if (c.epochs) rc.train.epochs = *c.epochs;
  io::write_file_atomic(path_in(c.out, "config.json"), train::run_config_json(rc));
  const auto ds = train::open_datasets(rc, path_in(c.out, "manifest.tsv"));
  Model t(rc.train);
  std::vector<train::EpochReport> reps;
  const std::string ckpt = path_in(c.out, "checkpoint.json");
  t.fit(*ds.train, ds.validation.get(), rc.train.epochs, [&](const train::EpochReport& r) {
    reps.push_back(r);
    io::write_file_atomic(path_in(c.out, "epochs.csv"), epochs_csv(reps));
    t.save_checkpoint(ckpt);
    out << "epoch " << r.epoch << " train_acc=" << r.train_acc << " val_acc=" << r.val_acc
        << " l_ce=" << r.loss.l_ce << " power_nw=" << r.power_w * 1e9 << '\n'
        << std::flush;
  });
  if (reps.empty()) t.save_checkpoint(ckpt);
  const auto bank = t.bank();
  write_hardware(c.out, bank, t.initial_bank());
  io::export_spice_params(bank, path_in(c.out, "afe.spice"));
  write_ac(c.out, bank);
  const auto snr = t.evaluate(*ds.test, rc.snr_list);
  io::write_file_atomic(path_in(c.out, "snr.csv"),
                        render([&](std::ostream& s) { train::write_snr_csv(s, snr); }));
  out << "wrote " << c.out << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, std::ostream& out) {
  RunConfig rc = resolve(c);
  auto t = trainer_from_checkpoint(rc, checkpoint);
  const auto ds = train::open_datasets(rc, path_in(c.out, "manifest.tsv"));
  const auto snr = t->evaluate(*ds.test, rc.snr_list);
  io::write_file_atomic(path_in(c.out, "snr.csv"),
                        render([&](std::ostream& s) { train::write_snr_csv(s, snr); }));
  write_hardware(c.out, t->bank(), t->initial_bank());
  for (const auto& r : snr) out << "snr " << r.snr_db << " accuracy " << r.accuracy << '\n';
  return 0;
}

std::string resolve_transient_list(const std::string& path) {
  if (fs::is_directory(path)) {
    const auto list = fs::path(path) / "transients.tsv";
    if (!fs::is_regular_file(list)) {
      throw FormatError("directory '" + path +
                        "' holds no transients.tsv; expected one `file.csv<TAB>label` line per "
                        "transient CSV (header time_s,ch01,...,ch16)");
    }
    return list.string();
  }
  if (!fs::is_regular_file(path)) throw FormatError("transient list '" + path + "' not found");
  return path;
}

int cmd_finetune(const Common& c, const std::string& checkpoint, const std::string& transients,
                 const std::string& save, std::ostream& out) {
  RunConfig rc = resolve(c);
  if (c.epochs) rc.train.finetune_epochs = *c.epochs;
  auto t = trainer_from_checkpoint(rc, checkpoint);
  t->set_mode(train::TrainMode::Finetune);
  const auto bank = t->bank();
  const auto ds = train::open_datasets(rc, path_in(c.out, "manifest.tsv"));
  const data::ClassMap classes(rc.keywords);

  std::unique_ptr<train::FeatureSource> src;
  if (!transients.empty()) {
    src = std::make_unique<train::ImportedFeatureSource>(
        train::read_transient_list(resolve_transient_list(transients), classes),
        rc.train.features);
  } else {
    src = std::make_unique<train::TransientFeatureSource>(
        *ds.train, bank, rc.train.features, train::ClipProtocol::Train,
        derive_seed(rc.train.seed, 0xf1), rc.oversample, rc.train.exec);
  }
  const train::TransientFeatureSource val(*ds.validation, bank, rc.train.features,
                                          train::ClipProtocol::Eval,
                                          derive_seed(rc.train.seed, 0xe7a1), rc.oversample,
                                          rc.train.exec);
  const auto reps = t->finetune(*src, &val, rc.train.finetune_epochs);
  io::write_file_atomic(path_in(c.out, "finetune_epochs.csv"), epochs_csv(reps));
  t->save_checkpoint(save.empty() ? path_in(c.out, "checkpoint_finetuned.json") : save);
  for (const auto& r : reps) {
    out << "finetune epoch " << r.epoch << " train_acc=" << r.train_acc
        << " val_acc=" << r.val_acc << '\n';
  }
  return 0;
}

int cmd_import(const Common& c, const std::string& checkpoint, const std::string& transients,
               std::ostream& out) {
  RunConfig rc = resolve(c);
  auto t = trainer_from_checkpoint(rc, checkpoint);
  const data::ClassMap classes(rc.keywords);
  const train::ImportedFeatureSource src(
      train::read_transient_list(resolve_transient_list(transients), classes), rc.train.features);
  const double acc = t->accuracy(src);
  nlohmann::json j = {{"items", src.size()}, {"accuracy", acc}};
  io::write_file_atomic(path_in(c.out, "import_eval.json"), j.dump(2) + "\n");
  out << "imported " << src.size() << " transients, accuracy " << acc << '\n';
  return 0;
}

int cmd_export_transient(const Common& c, const std::string& checkpoint,
                         const std::string& split_name, std::size_t count, std::ostream& out) {
  RunConfig rc = resolve(c);
  const auto bank = bank_for(rc, checkpoint);
  const auto ds = train::open_datasets(rc, path_in(c.out, "manifest.tsv"));
  const data::ClassMap classes(rc.keywords);
  const auto split = data::parse_split(split_name);
  const data::ClipSource& src = split == data::Split::Train        ? *ds.train
                                : split == data::Split::Validation ? *ds.validation
                                                                   : *ds.test;
  const std::size_t n = count == 0 ? src.size() : std::min(count, src.size());
  const std::string dir = path_in(c.out, "transients");
  std::ostringstream list;
  for (std::size_t i = 0; i < n; ++i) {
    const auto clip = data::eval_clip(src, i, derive_seed(rc.train.seed, 0xe7a1));
    const auto y = filterbank::simulate_transient_bank(bank, clip.samples, kSampleRate,
                                                       rc.oversample, rc.train.exec);
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.csv", i);
    io::write_file_atomic(path_in(dir, name), render([&](std::ostream& s) {
                            features::write_transient(s, y);
                          }));
    list << name << '\t' << classes.name(clip.label) << '\n';
  }
  io::write_file_atomic(path_in(dir, "transients.tsv"), list.str());
  out << "wrote " << n << " transients to " << dir << '\n';
  return 0;
}

int cmd_export_spice(const Common& c, const std::string& checkpoint, const std::string& path,
                     std::ostream& out) {
  RunConfig rc = resolve(c);
  const auto bank = bank_for(rc, checkpoint);
  const std::string target = path.empty() ? path_in(c.out, "afe.spice") : path;
  io::export_spice_params(bank, target);
  out << "wrote " << target << " and " << io::sidecar_path_for(target) << '\n';
  return 0;
}

int cmd_ac(const Common& c, const std::string& checkpoint, std::ostream& out) {
  RunConfig rc = resolve(c);
  write_ac(c.out, bank_for(rc, checkpoint));
  out << "wrote " << path_in(c.out, "ac_response.csv") << '\n';
  return 0;
}

int cmd_spectrogram(const Common& c, const std::string& checkpoint, const std::string& wav,
                    std::size_t index, bool transient, std::ostream& out) {
  RunConfig rc = resolve(c);
  const auto bank = bank_for(rc, checkpoint);
  std::vector<double> x;
  if (!wav.empty()) {
    const auto w = data::load_wav(wav);
    x = w.sample_rate == kSampleRate
            ? w.samples
            : data::resample(w.samples, w.sample_rate, static_cast<std::uint32_t>(kSampleRate));
  } else {
    const auto ds = train::open_datasets(rc, path_in(c.out, "manifest.tsv"));
    if (index >= ds.test->size()) throw DomainError("--index is past the end of the test split");
    x = data::eval_clip(*ds.test, index, derive_seed(rc.train.seed, 0xe7a1)).samples;
  }
  const auto spec = transient ? train::transient_features(bank, x, rc.train.features,
                                                          rc.oversample, rc.train.exec)
                              : train::frontend_forward(bank, x, rc.train.features, nullptr,
                                                        rc.train.exec);
  io::write_file_atomic(path_in(c.out, "spectrogram.csv"), render([&](std::ostream& s) {
                          features::write_spectrogram_csv(s, spec);
                        }));
  io::write_file_atomic(path_in(c.out, "spectrogram.svg"),
                        io::render_heatmap(spec.values, "spike-count spectrogram", "frame",
                                           "channel"));
  out << "spectrogram " << spec.values.rows() << " x " << spec.values.cols() << '\n';
  return 0;
}

int cmd_hyperopt(const Common& c, bool random, std::ostream& out) {
  RunConfig rc = resolve(c);
  if (c.epochs) rc.trial_epochs = *c.epochs;
  const auto ds = train::open_datasets(rc, path_in(c.out, "manifest.tsv"));
  const auto space = hyperopt::SearchSpace::hyperparams();
  const std::string ledger = path_in(c.out, random ? "ledger_random.csv" : "ledger.csv");
  std::vector<hyperopt::TrialRecord> resume;
  if (fs::is_regular_file(ledger)) {
    resume = hyperopt::parse_ledger(io::read_file(ledger), space);
    out << "resuming from " << resume.size() << " recorded trials\n";
  }
  const auto objective = [&](const std::vector<double>& x, std::uint64_t seed) {
    train::TrainConfig tc = rc.train;
    tc.hp = {x[0], x[1], x[2], x[3], x[4]};
    tc.seed = seed;
    Model t(tc);
    const auto reps = t.fit(*ds.train, ds.validation.get(), rc.trial_epochs);
    return reps.back().val_acc;
  };
  hyperopt::SearchOptions opts;
  opts.total = rc.trials;
  opts.init = rc.init_trials;
  opts.seed = rc.train.seed;
  const auto& hp = rc.train.hp;
  opts.start = std::vector<double>{hp.lr, hp.l2, hp.lambda_ce, hp.lambda_i, hp.lambda_c};
  const auto on_trial = [&](const std::vector<hyperopt::TrialRecord>& l) {
    io::write_file_atomic(ledger, hyperopt::ledger_csv(l, space));
    const auto& r = l.back();
    out << "trial " << r.trial << " acc "
        << (r.status == hyperopt::TrialStatus::Completed ? io::format_double(r.acc) : "failed")
        << '\n'
        << std::flush;
  };
  const auto res = random ? hyperopt::random_search(objective, space, opts, resume, on_trial)
                          : hyperopt::run_search(objective, space, opts, resume, on_trial);
  io::write_file_atomic(ledger, hyperopt::ledger_csv(res.ledger, space));
  if (!res.best) throw std::runtime_error("every trial failed");
  nlohmann::json best = {{"trial", res.best->trial}, {"accuracy", res.best->acc}};
  for (std::size_t k = 0; k < space.size(); ++k) best[space.dims[k].name] = res.best->x[k];
  io::write_file_atomic(path_in(c.out, random ? "best_random.json" : "best.json"),
                        best.dump(2) + "\n");
  out << "best trial " << res.best->trial << " accuracy " << res.best->acc << '\n';
  return 0;
}

// -------------------------------------------------------------------- plots

io::Series series_of(const io::CsvTable& t, const std::string& x, const std::string& y,
                     double scale = 1.0) {
  io::Series s{y, t.column_values(x), t.column_values(y)};
  if (scale != 1.0) {
    for (auto& v : s.y) v /= scale;
  }
  return s;
}

io::LinePlot loss_plot(const io::CsvTable& t, const std::string& title) {
  io::LinePlot p{title, "epoch", "loss relative to first epoch", false, {}};
  for (const char* name : {"l_ce", "l_p", "l_a"}) {
    const auto v = t.column_values(name);
    p.series.push_back(series_of(t, "epoch", name, v.empty() || v[0] == 0.0 ? 1.0 : v[0]));
  }
  return p;
}

int cmd_plot(const std::string& in_dir, const std::string& out_dir, std::ostream& out) {
  std::size_t made = 0;
  auto emit = [&](const std::string& name, const std::string& svg) {
    io::write_file_atomic(path_in(out_dir, name), svg);
    out << "wrote " << path_in(out_dir, name) << '\n';
    ++made;
  };
  auto has = [&](const std::string& f) { return fs::is_regular_file(path_in(in_dir, f)); };

  if (has("ac_response.csv")) {
    const auto t = io::read_csv(path_in(in_dir, "ac_response.csv"));
    io::LinePlot p{"AC response", "frequency (Hz)", "gain (dB)", true, {}};
    for (std::size_t k = 1; k < t.header.size(); ++k) {
      p.series.push_back(series_of(t, "freq_hz", t.header[k]));
    }
    emit("ac_response.svg", io::render_line_plot(p));
  }
  for (const char* f : {"epochs", "finetune_epochs"}) {
    if (!has(std::string(f) + ".csv")) continue;
    const auto t = io::read_csv(path_in(in_dir, std::string(f) + ".csv"));
    emit(std::string(f) + "_loss.svg", io::render_line_plot(loss_plot(t, "training losses")));
    io::LinePlot acc{"accuracy", "epoch", "accuracy", false,
                     {series_of(t, "epoch", "train_acc"), series_of(t, "epoch", "val_acc")}};
    emit(std::string(f) + "_accuracy.svg", io::render_line_plot(acc));
  }
  if (has("snr.csv")) {
    const auto t = io::read_csv(path_in(in_dir, "snr.csv"));
    io::LinePlot p{"accuracy vs SNR", "SNR (dB)", "accuracy", false,
                   {series_of(t, "snr_db", "accuracy")}};
    emit("snr.svg", io::render_line_plot(p));
  }
  if (has("spectrogram.csv")) {
    const auto t = io::read_csv(path_in(in_dir, "spectrogram.csv"));
    if (t.header.size() < 2) throw FormatError("spectrogram.csv has no frame columns");
    Array2D<double> v(t.rows.size(), t.header.size() - 1);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (std::size_t f = 1; f < t.header.size(); ++f) v(r, f - 1) = t.rows[r][f];
    }
    emit("spectrogram.svg", io::render_heatmap(v, "spike-count spectrogram", "frame", "channel"));
  }
  for (const char* f : {"ledger", "ledger_random"}) {
    if (!has(std::string(f) + ".csv")) continue;
    const auto space = hyperopt::SearchSpace::hyperparams();
    const auto ledger = hyperopt::parse_ledger(io::read_file(path_in(in_dir, std::string(f) + ".csv")),
                                               space);
    io::Series trials{"trial", {}, {}}, best{"incumbent", {}, {}};
    const auto inc = hyperopt::incumbent_curve(ledger);
    for (std::size_t i = 0; i < ledger.size(); ++i) {
      trials.x.push_back(static_cast<double>(ledger[i].trial));
      trials.y.push_back(ledger[i].acc);
      best.x.push_back(static_cast<double>(ledger[i].trial));
      best.y.push_back(inc[i]);
    }
    emit(std::string(f) + ".svg",
         io::render_line_plot({"hyperparameter search", "trial", "validation accuracy", false,
                               {trials, best}}));
  }
  if (made == 0) {
    throw FormatError("no plottable artifacts in '" + in_dir +
                      "' (looked for ac_response.csv, epochs.csv, finetune_epochs.csv, snr.csv, "
                      "spectrogram.csv, ledger.csv)");
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learnable analog filterbank front-end co-designed with a keyword classifier",
               "learnafe"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint, transients, save, wav, split = "test", plot_in, spice_path;
  std::size_t count = 0, index = 0;
  bool transient_path = false, random = false;

  auto* train = app.add_subcommand("train", "stage-1 training; writes checkpoint and reports");
  add_common(train, common);

  auto* finetune = app.add_subcommand("finetune", "classifier-only training on biquad features");
  add_common(finetune, common);
  finetune->add_option("--checkpoint", checkpoint, "stage-1 checkpoint")->required();
  finetune->add_option("--transients", transients, "imported transient list or directory");
  finetune->add_option("--save", save, "finetuned checkpoint path");

  auto* eval = app.add_subcommand("eval", "accuracy per SNR on the test split");
  add_common(eval, common);
  eval->add_option("--checkpoint", checkpoint)->required();

  auto* hopt = app.add_subcommand("hyperopt", "Bayesian search over the five hyperparameters");
  add_common(hopt, common);
  hopt->add_flag("--random", random, "random-search baseline instead");

  auto* spice = app.add_subcommand("export-spice", "write .param include file and sidecar");
  add_common(spice, common);
  spice->add_option("--checkpoint", checkpoint, "default: initial bank");
  spice->add_option("--path", spice_path, "default: <out>/afe.spice");

  auto* imp = app.add_subcommand("import-transient", "evaluate on external transient CSVs");
  add_common(imp, common);
  imp->add_option("--checkpoint", checkpoint)->required();
  imp->add_option("--transients", transients, "list file or directory")->required();

  auto* exp = app.add_subcommand("export-transient", "simulate the biquad path to CSVs");
  add_common(exp, common);
  exp->add_option("--checkpoint", checkpoint, "default: initial bank");
  exp->add_option("--split", split)->capture_default_str();
  exp->add_option("--count", count, "0 = whole split")->capture_default_str();

  auto* ac = app.add_subcommand("ac-response", "AC response table of the bank");
  add_common(ac, common);
  ac->add_option("--checkpoint", checkpoint, "default: initial bank");

  auto* spec = app.add_subcommand("spectrogram", "spike-count spectrogram of one clip");
  add_common(spec, common);
  spec->add_option("--checkpoint", checkpoint, "default: initial bank");
  spec->add_option("--wav", wav, "16-bit PCM mono file; default: a test-split clip");
  spec->add_option("--index", index, "test-split clip index")->capture_default_str();
  spec->add_flag("--transient", transient_path, "use the biquad path");

  auto* plot = app.add_subcommand("plot", "render SVG figures from artifact CSVs");
  plot->add_option("--in", plot_in, "artifact directory")->required();
  plot->add_option("--out", common.out, "figure directory")->capture_default_str();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(common, out);
    if (finetune->parsed()) return cmd_finetune(common, checkpoint, transients, save, out);
    if (eval->parsed()) return cmd_eval(common, checkpoint, out);
    if (hopt->parsed()) return cmd_hyperopt(common, random, out);
    if (spice->parsed()) return cmd_export_spice(common, checkpoint, spice_path, out);
    if (imp->parsed()) return cmd_import(common, checkpoint, transients, out);
    if (exp->parsed()) return cmd_export_transient(common, checkpoint, split, count, out);
    if (ac->parsed()) return cmd_ac(common, checkpoint, out);
    if (spec->parsed()) return cmd_spectrogram(common, checkpoint, wav, index, transient_path, out);
    if (plot->parsed()) return cmd_plot(plot_in, common.out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace learnafe::cli
