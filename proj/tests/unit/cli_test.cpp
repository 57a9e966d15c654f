#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "learnafe/io/atomic_file.hpp"
#include "learnafe/hyperopt/search.hpp"
#include "learnafe/io/csv.hpp"

namespace fs = std::filesystem;
using learnafe::io::read_csv;
using learnafe::io::read_file;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  args.insert(args.begin(), "learnafe");
  const int code = learnafe::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "learnafe_cli_test";
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(config()) << R"({"epochs": 2, "batch_size": 8, "finetune_epochs": 1, "seed": 5,
      "model": {"channels": 8, "blocks": 2},
      "data": {"root": "synthetic", "synthetic": {"classes": ["silence", "yes", "no"],
               "train_per_class": 6, "val_per_class": 3, "test_per_class": 3, "clip_samples": 4000}},
      "hyperopt": {"trials": 3, "init_trials": 2, "trial_epochs": 1}})";
    const auto r = run_cli({"train", "--config", config(), "--out", dir("run1")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string config() { return (root_ / "tiny.json").string(); }
  static std::string dir(const std::string& name) { return (root_ / name).string(); }
  static std::string file(const std::string& d, const std::string& f) { return (root_ / d / f).string(); }

  static fs::path root_;
};

fs::path Cli::root_;

}  // namespace

TEST_F(Cli, TrainWritesArtifactsDeterministically) {
  for (const char* f : {"config.json", "epochs.csv", "checkpoint.json", "hardware.csv", "hardware.json",
                        "afe.spice", "afe.spice.json", "ac_response.csv", "snr.csv"}) {
    EXPECT_TRUE(fs::exists(file("run1", f))) << f;
  }
  const auto epochs = read_csv(file("run1", "epochs.csv"));
  EXPECT_EQ(epochs.header, (std::vector<std::string>{"epoch", "train_acc", "val_acc", "l_ce", "l_p", "l_a",
                                                     "power_nw", "area_mm2"}));
  EXPECT_EQ(epochs.rows.size(), 2u);
  const auto r = run_cli({"train", "--config", config(), "--out", dir("run2")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(file("run1", "epochs.csv")), read_file(file("run2", "epochs.csv")));
  EXPECT_EQ(read_file(file("run1", "checkpoint.json")), read_file(file("run2", "checkpoint.json")));
  const auto other = run_cli({"train", "--config", config(), "--out", dir("run3"), "--seed", "6", "--epochs", "1"});
  ASSERT_EQ(other.code, 0) << other.err;
  EXPECT_EQ(read_csv(file("run3", "epochs.csv")).rows.size(), 1u);
}

TEST_F(Cli, EvalWritesOneRowPerSnr) {
  const auto r = run_cli({"eval", "--config", config(), "--out", dir("eval"), "--checkpoint",
                          file("run1", "checkpoint.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = read_csv(file("eval", "snr.csv"));
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_TRUE(std::isinf(t.rows[4][0]));
  const auto custom = run_cli({"eval", "--config", config(), "--out", dir("eval2"), "--checkpoint",
                               file("run1", "checkpoint.json"), "--snr-list", "0,clean"});
  ASSERT_EQ(custom.code, 0) << custom.err;
  EXPECT_EQ(read_csv(file("eval2", "snr.csv")).rows.size(), 2u);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({"finetune", "--config", config(), "--out", dir("ft0")}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"train", "--config", dir("missing.json")}).code, 2);
  const auto bad_snr = run_cli({"eval", "--config", config(), "--out", dir("e3"), "--checkpoint",
                                file("run1", "checkpoint.json"), "--snr-list", "5,loud"});
  EXPECT_NE(bad_snr.code, 0);
}

TEST_F(Cli, MissingDatasetIsActionable) {
  const auto r = run_cli({"train", "--config", config(), "--out", dir("nodata"), "--data-root", dir("nowhere")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nowhere"), std::string::npos);
}

TEST_F(Cli, TransientExportImportAndFinetune) {
  const auto ck = file("run1", "checkpoint.json");
  auto r = run_cli({"export-transient", "--config", config(), "--out", dir("tr"), "--checkpoint", ck, "--count", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(file("tr", "transients/00003.csv")));
  r = run_cli({"import-transient", "--config", config(), "--out", dir("tr"), "--checkpoint", ck, "--transients",
               file("tr", "transients")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(file("tr", "import_eval.json")));

  fs::create_directories(root_ / "emptyd");
  r = run_cli({"import-transient", "--config", config(), "--out", dir("tr"), "--checkpoint", ck, "--transients",
               dir("emptyd")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("transients.tsv"), std::string::npos);

  const auto bank_before = read_file(ck);
  r = run_cli({"finetune", "--config", config(), "--out", dir("ft"), "--checkpoint", ck});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(file("ft", "finetune_epochs.csv")).rows.size(), 1u);
  EXPECT_TRUE(fs::exists(file("ft", "checkpoint_finetuned.json")));
  EXPECT_EQ(read_file(ck), bank_before);
}

TEST_F(Cli, SpiceAcAndSpectrogram) {
  auto r = run_cli({"export-spice", "--config", config(), "--out", dir("sp")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_of(read_file(file("sp", "afe.spice")), ".param"), 64u);
  r = run_cli({"ac-response", "--config", config(), "--out", dir("sp")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(file("sp", "ac_response.csv")).header.size(), 17u);
  r = run_cli({"spectrogram", "--config", config(), "--out", dir("sp"), "--index", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = read_csv(file("sp", "spectrogram.csv"));
  EXPECT_EQ(s.rows.size(), 16u);
  EXPECT_EQ(s.header.size(), 1u + 4000u / 200u);
  EXPECT_EQ(s.rows[15][0], 16.0);
}

TEST_F(Cli, PlotRendersAvailableArtifacts) {
  auto r = run_cli({"plot", "--in", dir("run1"), "--out", dir("figs")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_of(read_file(file("figs", "ac_response.svg")), "class=\"series\""), 16u);
  EXPECT_EQ(count_of(read_file(file("figs", "epochs_loss.svg")), "class=\"series\""), 3u);
  EXPECT_TRUE(fs::exists(file("figs", "epochs_accuracy.svg")));
  EXPECT_TRUE(fs::exists(file("figs", "snr.svg")));
  fs::create_directories(root_ / "blank");
  EXPECT_EQ(run_cli({"plot", "--in", dir("blank"), "--out", dir("figs2")}).code, 1);
}

TEST_F(Cli, HyperoptLedgerResumes) {
  auto r = run_cli({"hyperopt", "--config", config(), "--out", dir("ho"), "--trials", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto space = learnafe::hyperopt::SearchSpace::hyperparams();
  const auto ledger_of = [&](const char* f) { return learnafe::hyperopt::parse_ledger(read_file(file("ho", f)), space); };
  EXPECT_EQ(ledger_of("ledger.csv").size(), 2u);
  r = run_cli({"hyperopt", "--config", config(), "--out", dir("ho")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ledger = ledger_of("ledger.csv");
  ASSERT_EQ(ledger.size(), 3u);
  EXPECT_EQ(ledger[2].trial, 2u);
  EXPECT_TRUE(fs::exists(file("ho", "best.json")));
  r = run_cli({"hyperopt", "--config", config(), "--out", dir("ho"), "--random", "--trials", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ledger_of("ledger_random.csv").size(), 2u);
}
