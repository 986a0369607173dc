#pragma once

// Run configuration for the command-line workflows. A configuration is a JSON
// document; it is layered on top of a named preset ("paper" or "desk") and
// every field is validated before any work starts.

#include "rbmamp/experiment.hpp"
#include "rbmamp/rbm.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace rbmamp {

struct RunConfig {
  std::string preset;  // name of the preset this configuration started from
  std::uint64_t seed = 0;
  int jobs = 1;

  // data
  std::filesystem::path mnist_train;
  std::filesystem::path mnist_test;
  int train_samples = 0;  // 0 = every image in mnist_train
  double binarize_threshold = 0.0;

  // model files
  std::filesystem::path model_in;
  std::filesystem::path model_out;
  std::filesystem::path results_dir;

  // RBM training (seed is derived from the top-level seed)
  TrainSpec train;

  // slab parameters; fitted from the training pool when absent
  std::optional<double> prior_mu;
  std::optional<double> prior_sigma2;

  SweepConfig sweep;
};

enum class Command { Train, Sweep, Inspect };

/// Built-in presets: "paper" (full-scale protocol) and "desk" (reduced scale).
RunConfig preset_config(std::string_view name);

/// Overlays the fields present in `json_text` onto `base`. Unknown keys and
/// wrongly typed values throw ValidationError.
RunConfig overlay_config(RunConfig base, std::string_view json_text);

/// Reads a JSON file and overlays it onto the preset named by its "preset"
/// key (or `default_preset` when absent).
RunConfig load_config_file(const std::filesystem::path& path, std::string_view default_preset);

/// Range checks plus, for `command`, existence of every input path.
void validate_config(const RunConfig& cfg, Command command);

/// Canonical JSON rendering (sorted keys, two-space indent).
std::string config_to_json(const RunConfig& cfg);

/// Seeds of the training run and of the sweep, derived from cfg.seed.
std::uint64_t training_seed(const RunConfig& cfg);
std::uint64_t sweep_seed(const RunConfig& cfg);

}  // namespace rbmamp
