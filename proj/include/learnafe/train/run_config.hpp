#pragma once

// JSON run configuration shared by the command-line tools, and the dataset
// plumbing that turns it into clip sources.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "learnafe/data/corpus.hpp"
#include "learnafe/train/trainer.hpp"

namespace learnafe::train {

struct RunConfig {
  TrainConfig train;
  std::string data_root;  // corpus root, or "synthetic"
  std::string noise_dir;  // default <data_root>/_background_noise_
  std::vector<std::string> keywords = data::ClassMap::default_keywords();
  data::SyntheticTaskConfig synthetic;
  std::vector<std::optional<double>> snr_list = {5.0, 10.0, 15.0, 20.0, std::nullopt};
  std::size_t trials = 25;
  std::size_t init_trials = 10;
  std::size_t trial_epochs = 5;
  std::size_t oversample = 8;
  std::string simulator_command;  // optional external transient simulator hook
};

/// Parses a config document. Unknown keys are rejected so typos fail loudly.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
/// Fully resolved config as JSON (every key written).
std::string run_config_json(const RunConfig& cfg);

/// "5,10,15,20,clean" -> {5, 10, 15, 20, nullopt}
std::vector<std::optional<double>> parse_snr_list(const std::string& text);

struct Datasets {
  data::ClassMap classes;
  std::unique_ptr<data::ClipSource> train;
  std::unique_ptr<data::ClipSource> validation;
  std::unique_ptr<data::ClipSource> test;
};

/// Opens the three splits. A missing corpus raises FormatError naming the
/// expected layout. `manifest_cache` is where the split manifest is stored.
Datasets open_datasets(const RunConfig& cfg, const std::string& manifest_cache);

}  // namespace learnafe::train
