#include "rbmamp/config.hpp"
#include "rbmamp/error.hpp"
#include "rbmamp/random.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rbmamp;

namespace {

const std::filesystem::path kSource = RBMAMP_SOURCE_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Presets, PaperHyperparameters) {
  const RunConfig cfg = preset_config("paper");
  EXPECT_EQ(cfg.train.n_hidden, 500);
  EXPECT_EQ(cfg.train.epochs, 100);
  EXPECT_EQ(cfg.train.learning_rate, 0.005);
  EXPECT_EQ(cfg.train.weight_decay, 0.001);
  EXPECT_EQ(cfg.train.batch_size, 100);
  EXPECT_EQ(cfg.train_samples, 60000);
  EXPECT_EQ(cfg.sweep.n_test, 300);
  EXPECT_EQ(cfg.sweep.delta, 1e-8);
  EXPECT_EQ(cfg.sweep.success_mse, 1e-4);
  EXPECT_EQ(cfg.sweep.persistent_start, 50);
  const std::vector<double> alphas = {0.025, 0.074, 0.123, 0.172, 0.222,
                                      0.271, 0.320, 0.369, 0.418, 0.467};
  EXPECT_EQ(cfg.sweep.alphas, alphas);
  EXPECT_EQ(cfg.sweep.methods.size(), 4u);
}

TEST(Presets, DeskScale) {
  const RunConfig cfg = preset_config("desk");
  EXPECT_EQ(cfg.train.n_hidden, 128);
  EXPECT_EQ(cfg.train.epochs, 40);
  EXPECT_EQ(cfg.train_samples, 10000);
  EXPECT_EQ(cfg.sweep.n_test, 50);
  EXPECT_EQ(cfg.sweep.n_seeds, 3);
  EXPECT_THROW(preset_config("huge"), ValidationError);
}

TEST(Presets, ShippedFilesMatchBuiltIns) {
  for (const char* name : {"desk", "paper"}) {
    const auto path = kSource / "configs" / (std::string(name) + ".json");
    EXPECT_EQ(slurp(path), config_to_json(preset_config(name))) << path;
    EXPECT_EQ(config_to_json(load_config_file(path, "desk")), config_to_json(preset_config(name)));
  }
}

TEST(Overlay, PartialDocumentKeepsDefaults) {
  const RunConfig cfg = overlay_config(preset_config("desk"),
                                       R"({"seed": 7, "sweep": {"alphas": [0.2], "amp": {"tol": 1e-6}}})");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.sweep.alphas, std::vector<double>{0.2});
  EXPECT_EQ(cfg.sweep.amp.tol, 1e-6);
  EXPECT_EQ(cfg.sweep.amp.max_iter, 300);
  EXPECT_EQ(cfg.train.n_hidden, 128);
}

TEST(Overlay, NullPriorMeansFitAtRuntime) {
  const RunConfig cfg = overlay_config(preset_config("desk"), R"({"prior": {"mu": null}})");
  EXPECT_FALSE(cfg.prior_mu.has_value());
  EXPECT_TRUE(cfg.prior_sigma2.has_value());
}

TEST(Overlay, RejectsUnknownKeysAndWrongTypes) {
  const RunConfig base = preset_config("desk");
  EXPECT_THROW(overlay_config(base, R"({"sed": 1})"), ValidationError);
  EXPECT_THROW(overlay_config(base, R"({"sweep": {"amp": {"tolerance": 1}}})"), ValidationError);
  EXPECT_THROW(overlay_config(base, R"({"seed": "one"})"), ValidationError);
  EXPECT_THROW(overlay_config(base, R"({"sweep": {"methods": ["Gibbs"]}})"), ValidationError);
  EXPECT_THROW(overlay_config(base, R"({"sweep": {"sensing_variance": "1"}})"), ValidationError);
  EXPECT_THROW(overlay_config(base, R"({"preset": "paper"})"), ValidationError);
  EXPECT_THROW(overlay_config(base, R"({"data": 3})"), ValidationError);
  EXPECT_THROW(overlay_config(base, "{not json"), ValidationError);
  try {
    overlay_config(base, R"({"train": {"epoch": 3}})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("train.epoch"), std::string::npos);
  }
}

TEST(Validate, RangesAndPaths) {
  const auto cwd = std::filesystem::current_path();
  std::filesystem::current_path(kSource);
  RunConfig cfg = preset_config("desk");
  EXPECT_NO_THROW(validate_config(cfg, Command::Train));

  RunConfig bad = cfg;
  bad.jobs = 0;
  EXPECT_THROW(validate_config(bad, Command::Train), ValidationError);
  bad = cfg;
  bad.train.epochs = -1;
  EXPECT_THROW(validate_config(bad, Command::Train), ValidationError);
  bad = cfg;
  bad.prior_sigma2 = 0.0;
  EXPECT_THROW(validate_config(bad, Command::Train), ValidationError);
  bad = cfg;
  bad.mnist_train = "data/desk/absent.gz";
  EXPECT_THROW(validate_config(bad, Command::Train), ValidationError);
  bad = cfg;
  bad.sweep.alphas = {0.3, 0.1};
  EXPECT_THROW(validate_config(bad, Command::Sweep), ValidationError);

  bad = cfg;
  bad.model_in = "results/desk/definitely_missing.rbm1";
  EXPECT_THROW(validate_config(bad, Command::Sweep), ValidationError);
  bad.sweep.methods = {Method::IidGB};
  EXPECT_NO_THROW(validate_config(bad, Command::Sweep));
  EXPECT_THROW(validate_config(bad, Command::Inspect), ValidationError);
  std::filesystem::current_path(cwd);
}

TEST(Seeds, DerivedFromTopLevelSeed) {
  RunConfig a = preset_config("desk");
  RunConfig b = a;
  EXPECT_EQ(training_seed(a), training_seed(b));
  EXPECT_NE(training_seed(a), sweep_seed(a));
  b.seed += 1;
  EXPECT_NE(training_seed(a), training_seed(b));
  EXPECT_EQ(training_seed(a), derive_seed(a.seed, "train"));
}

TEST(Random, DeriveSeedIsStableAndMixing) {
  EXPECT_EQ(hash_label(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hash_label("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(derive_seed(1, "x"), derive_seed(1, "x"));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
  Rng a = make_rng(5, "stream"), b = make_rng(5, "stream");
  EXPECT_EQ(a(), b());
}
