// rbmamp: train binary RBM support models, run compressed-sensing sweeps and
// inspect model files.
//
//   rbmamp train   --preset desk
//   rbmamp sweep   --preset desk --jobs 4
//   rbmamp inspect results/desk/rbm_128.rbm1
//
// Exit codes: 0 success, 2 configuration/validation, 3 I/O, 4 numerical divergence.

#include "rbmamp/config.hpp"
#include "rbmamp/dataset.hpp"
#include "rbmamp/error.hpp"
#include "rbmamp/experiment.hpp"
#include "rbmamp/rbm.hpp"
#include "rbmamp/rbm_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rbmamp;

namespace {

struct CommonFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--preset", flags.preset, "Base preset")
      ->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--seed", flags.seed, "Top-level seed (overrides the configuration)");
  cmd->add_option("--jobs", flags.jobs, "Concurrent reconstruction workers")
      ->check(CLI::PositiveNumber);
}

RunConfig resolve(const CommonFlags& flags) {
  const std::string preset = flags.preset.empty() ? "desk" : flags.preset;
  RunConfig cfg =
      flags.config.empty() ? preset_config(preset) : load_config_file(flags.config, preset);
  if (!flags.preset.empty() && cfg.preset != flags.preset) {
    throw ValidationError(fmt::format("--preset {} conflicts with preset '{}' in {}",
                                      flags.preset, cfg.preset, flags.config));
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  cfg.sweep.jobs = cfg.jobs;
  return cfg;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", p.parent_path().string(), ec.message()));
  }
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  write_file_bytes(p, std::as_bytes(std::span(text.data(), text.size())));
}

ImageSet load_training_pool(const RunConfig& cfg) {
  ImageSet pool = read_idx_file(cfg.mnist_train);
  if (cfg.train_samples > 0) {
    if (pool.count() < cfg.train_samples) {
      fmt::print(stderr, "note: {} holds {} images; using all of them (train_samples = {})\n",
                 cfg.mnist_train.string(), pool.count(), cfg.train_samples);
    }
    pool = pool.head(cfg.train_samples);
  }
  return pool;
}

int cmd_train(const RunConfig& cfg) {
  validate_config(cfg, Command::Train);
  const ImageSet pool = load_training_pool(cfg);
  const Matrix data = binarize(pool.images, cfg.binarize_threshold);

  Matrix held_out;
  if (!cfg.mnist_test.empty() && fs::is_regular_file(cfg.mnist_test)) {
    held_out = binarize(read_idx_file(cfg.mnist_test).head(cfg.train.batch_size).images,
                        cfg.binarize_threshold);
  } else {
    held_out = data.bottomRows(std::min<Eigen::Index>(cfg.train.batch_size, data.rows()));
  }

  TrainSpec spec = cfg.train;
  spec.seed = training_seed(cfg);
  fmt::print("training RBM: n_v = {}, n_h = {}, {} samples, {} epochs, lr = {}, decay = {}\n",
             data.cols(), spec.n_hidden, data.rows(), spec.epochs, spec.learning_rate,
             spec.weight_decay);
  const BinaryRbm rbm = train_rbm(spec, data, [&](int epoch, const BinaryRbm& model) {
    fmt::print("epoch {:>4}/{}  held-out reconstruction error {:.6f}\n", epoch, spec.epochs,
               reconstruction_error(model, held_out));
    std::fflush(stdout);
  });

  ensure_parent(cfg.model_out);
  write_rbm_file(cfg.model_out, rbm);
  fmt::print("wrote {}\n", cfg.model_out.string());
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  validate_config(cfg, Command::Sweep);

  const ImageSet test = read_idx_file(cfg.mnist_test);
  std::optional<BinaryRbm> rbm;
  if (std::any_of(cfg.sweep.methods.begin(), cfg.sweep.methods.end(), needs_rbm)) {
    rbm = read_rbm_file(cfg.model_in);
  }

  PriorModels models;
  const bool need_pool = !cfg.prior_mu || !cfg.prior_sigma2 ||
                         std::find(cfg.sweep.methods.begin(), cfg.sweep.methods.end(),
                                   Method::EmpiricalGB) != cfg.sweep.methods.end();
  if (need_pool) {
    const ImageSet pool = load_training_pool(cfg);
    models.rho_emp = empirical_support_rates(binarize(pool.images, cfg.binarize_threshold));
    models.gb = fit_gb_params(pool.images);
  }
  if (cfg.prior_mu) models.gb.mu = *cfg.prior_mu;
  if (cfg.prior_sigma2) models.gb.sigma2 = *cfg.prior_sigma2;
  if (rbm) models.rbm = &*rbm;

  SweepConfig sweep = cfg.sweep;
  sweep.seed = sweep_seed(cfg);
  fmt::print("sweep: {} alphas x {} methods x {} images x {} seeds, mu = {}, sigma2 = {}\n",
             sweep.alphas.size(), sweep.methods.size(), sweep.n_test, sweep.n_seeds,
             models.gb.mu, models.gb.sigma2);

  const SweepResults results =
      run_sweep(sweep, test, models, [](std::size_t done, std::size_t total) {
        if (done % 50 == 0 || done == total) {
          fmt::print(stderr, "  {}/{} reconstructions\n", done, total);
        }
      });

  write_text(cfg.results_dir / "summary.csv", summary_csv(results.summary));
  write_text(cfg.results_dir / "detail.csv", detail_csv(results.detail));
  write_text(cfg.results_dir / "config.json", config_to_json(cfg));

  fmt::print("{:>7} {:>12} {:>9} {:>9} {:>9} {:>7}\n", "alpha", "method", "success", "mcc",
             "mcc_std", "oracle");
  for (const SummaryRow& r : results.summary) {
    fmt::print("{:>7.3f} {:>12} {:>9.3f} {:>9.3f} {:>9.3f} {:>7.3f}\n", r.alpha,
               method_name(r.method), r.success_rate, r.mcc_mean, r.mcc_std, r.oracle);
  }
  fmt::print("wrote {}/summary.csv and detail.csv\n", cfg.results_dir.string());
  return 0;
}

int cmd_inspect(const fs::path& path) {
  const BinaryRbm rbm = read_rbm_file(path);
  const auto n = static_cast<double>(rbm.W.size());
  const double mean = rbm.W.mean();
  const double sd = std::sqrt((rbm.W.array() - mean).square().sum() / n);
  const double lo = rbm.W.minCoeff();
  const double hi = rbm.W.maxCoeff();

  fmt::print("file         {}\n", path.string());
  fmt::print("n_v          {}\n", rbm.n_visible());
  fmt::print("n_h          {}\n", rbm.n_hidden());
  fmt::print("|vbias|      {:.6g}\n", rbm.vbias.norm());
  fmt::print("|hbias|      {:.6g}\n", rbm.hbias.norm());
  fmt::print("|W|_F        {:.6g}\n", rbm.W.norm());
  fmt::print("W mean/sd    {:.6g} / {:.6g}\n", mean, sd);
  fmt::print("W min/max    {:.6g} / {:.6g}\n", lo, hi);
  fmt::print("max |W|      {:.6g}\n", rbm.W.cwiseAbs().maxCoeff());

  constexpr int kBins = 10;
  std::vector<long> counts(kBins, 0);
  const double width = (hi - lo) / kBins;
  for (Eigen::Index k = 0; k < rbm.W.size(); ++k) {
    int b = width > 0.0 ? static_cast<int>((rbm.W.data()[k] - lo) / width) : 0;
    counts[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))]++;
  }
  fmt::print("W histogram\n");
  for (int b = 0; b < kBins; ++b) {
    fmt::print("  [{:+.4f}, {:+.4f})  {}\n", lo + b * width, lo + (b + 1) * width,
               counts[static_cast<std::size_t>(b)]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AMP compressed sensing with RBM support priors"};
  app.require_subcommand(1);

  CommonFlags train_flags, sweep_flags, inspect_flags;
  CLI::App* train = app.add_subcommand("train", "Train a binary RBM on binarized images");
  add_common(train, train_flags);
  CLI::App* sweep = app.add_subcommand("sweep", "Run the reconstruction sweep and write CSVs");
  add_common(sweep, sweep_flags);
  CLI::App* inspect = app.add_subcommand("inspect", "Summarize an RBM1 model file");
  add_common(inspect, inspect_flags);
  std::string model_path;
  inspect->add_option("model", model_path, "RBM1 file (default: model.in of the configuration)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(resolve(train_flags));
    if (sweep->parsed()) return cmd_sweep(resolve(sweep_flags));
    if (inspect->parsed()) {
      fs::path path = model_path;
      if (path.empty()) {
        const RunConfig cfg = resolve(inspect_flags);
        validate_config(cfg, Command::Inspect);
        path = cfg.model_in;
      }
      return cmd_inspect(path);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
