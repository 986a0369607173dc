#include "rbmamp/config.hpp"

#include "rbmamp/error.hpp"
#include "rbmamp/random.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rbmamp {
namespace {

using nlohmann::json;

const std::vector<double> kPaperAlphas = {0.025, 0.074, 0.123, 0.172, 0.222,
                                          0.271, 0.320, 0.369, 0.418, 0.467};

std::vector<Method> all_methods() {
  return {Method::IidGB, Method::EmpiricalGB, Method::RbmNmf, Method::RbmTap};
}

// Walks one JSON object, consuming known keys and rejecting the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(fmt::format("config: {} must be an object", where()));
  }

  /// Rejects any key that was not consumed by read()/child().
  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.contains(item.key())) {
        throw ValidationError(fmt::format("config: unknown key '{}{}'", prefix(), item.key()));
      }
    }
  }

  template <class T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      target = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(fmt::format("config: '{}{}' has the wrong type", prefix(), key));
    }
  }

  void read_path(const char* key, std::filesystem::path& target) {
    std::string s = target.string();
    read(key, s);
    target = s;
  }

  void read_optional(const char* key, std::optional<double>& target) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (v.is_null()) {
      target.reset();
    } else if (v.is_number()) {
      target = v.get<double>();
    } else {
      throw ValidationError(fmt::format("config: '{}{}' must be a number or null", prefix(), key));
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  std::string prefix() const { return path_.empty() ? "" : path_ + "."; }

 private:
  std::string where() const { return path_.empty() ? "the document" : "'" + path_ + "'"; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_amp(const json& j, AmpOptions& amp) {
  Section s(j, "sweep.amp");
  s.read("max_iter", amp.max_iter);
  s.read("tol", amp.tol);
  s.read("damping", amp.damping);
  s.finish();
}

void read_fpi(const json& j, FpiOptions& fpi) {
  Section s(j, "sweep.fpi");
  s.read("tol", fpi.tol);
  s.read("max_iter", fpi.max_iter);
  s.read("damping", fpi.damping);
  s.finish();
}

std::string sensing_name(SensingVariance v) { return v == SensingVariance::InvN ? "1/N" : "1/sqrt(N)"; }

SensingVariance parse_sensing(const std::string& s) {
  if (s == "1/N") return SensingVariance::InvN;
  if (s == "1/sqrt(N)") return SensingVariance::InvSqrtN;
  throw ValidationError(
      fmt::format("config: sweep.sensing_variance must be \"1/N\" or \"1/sqrt(N)\", got \"{}\"", s));
}

std::string init_name(VisibleInit v) { return v == VisibleInit::Zero ? "zero" : "sample_from_bias"; }

VisibleInit parse_init(const std::string& s) {
  if (s == "zero") return VisibleInit::Zero;
  if (s == "sample_from_bias") return VisibleInit::SampleFromBias;
  throw ValidationError(fmt::format(
      "config: sweep.visible_init must be \"zero\" or \"sample_from_bias\", got \"{}\"", s));
}

void read_sweep(const json& j, SweepConfig& sw) {
  Section s(j, "sweep");
  s.read("alphas", sw.alphas);
  std::vector<std::string> methods;
  for (Method m : sw.methods) methods.emplace_back(method_name(m));
  s.read("methods", methods);
  sw.methods.clear();
  for (const std::string& m : methods) sw.methods.push_back(parse_method(m));
  s.read("n_test", sw.n_test);
  s.read("n_seeds", sw.n_seeds);
  s.read("delta", sw.delta);
  s.read("success_mse", sw.success_mse);
  s.read("persistent_start", sw.persistent_start);
  std::string sensing = sensing_name(sw.sensing);
  s.read("sensing_variance", sensing);
  sw.sensing = parse_sensing(sensing);
  std::string init = init_name(sw.visible_init);
  s.read("visible_init", init);
  sw.visible_init = parse_init(init);
  if (const json* amp = s.child("amp")) read_amp(*amp, sw.amp);
  if (const json* fpi = s.child("fpi")) read_fpi(*fpi, sw.fpi);
  s.finish();
}

void require_range(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("config: " + what);
}

void require_file(const std::filesystem::path& p, const char* key) {
  if (p.empty()) throw ValidationError(fmt::format("config: {} is not set", key));
  if (!std::filesystem::is_regular_file(p)) {
    throw ValidationError(fmt::format("config: {} = '{}' does not exist", key, p.string()));
  }
}

}  // namespace

RunConfig preset_config(std::string_view name) {
  RunConfig cfg;
  cfg.preset = std::string(name);
  cfg.seed = 20160128;
  cfg.jobs = 1;
  cfg.binarize_threshold = 0.0;

  cfg.train.weight_decay = 0.001;
  cfg.train.batch_size = 100;

  cfg.sweep.methods = all_methods();
  cfg.sweep.delta = 1e-8;
  cfg.sweep.success_mse = 1e-4;
  cfg.sweep.persistent_start = 50;
  cfg.sweep.amp = AmpOptions{};
  cfg.sweep.fpi = FpiOptions{};

  if (name == "paper") {
    cfg.mnist_train = "data/mnist/train-images-idx3-ubyte.gz";
    cfg.mnist_test = "data/mnist/t10k-images-idx3-ubyte.gz";
    cfg.train_samples = 60000;
    cfg.model_in = cfg.model_out = "results/paper/rbm_500.rbm1";
    cfg.results_dir = "results/paper";
    cfg.train.n_hidden = 500;
    cfg.train.epochs = 100;
    cfg.train.learning_rate = 0.005;
    cfg.sweep.alphas = kPaperAlphas;
    cfg.sweep.n_test = 300;
    cfg.sweep.n_seeds = 1;
    return cfg;
  }
  if (name == "desk") {
    cfg.mnist_train = "data/desk/train-images-idx3-ubyte.gz";
    cfg.mnist_test = "data/desk/t10k-images-idx3-ubyte.gz";
    cfg.train_samples = 10000;
    cfg.model_in = cfg.model_out = "results/desk/rbm_128.rbm1";
    cfg.results_dir = "results/desk";
    cfg.train.n_hidden = 128;
    cfg.train.epochs = 40;
    cfg.train.learning_rate = 0.05;
    // Slab parameters of the shipped desk training pool (pooled non-zero pixels).
    cfg.prior_mu = 0.6842159320622152;
    cfg.prior_sigma2 = 0.11875458256892993;
    cfg.sweep.alphas = {0.1, 0.2, 0.22, 0.3};
    cfg.sweep.n_test = 50;
    cfg.sweep.n_seeds = 3;
    return cfg;
  }
  throw ValidationError(fmt::format("unknown preset '{}' (expected paper or desk)", name));
}

RunConfig overlay_config(RunConfig cfg, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("config: malformed JSON: {}", e.what()));
  }
  Section top(doc, "");
  std::string preset = cfg.preset;
  top.read("preset", preset);
  top.read("seed", cfg.seed);
  top.read("jobs", cfg.jobs);
  top.read_path("results_dir", cfg.results_dir);
  if (const json* data = top.child("data")) {
    Section s(*data, "data");
    s.read_path("mnist_train", cfg.mnist_train);
    s.read_path("mnist_test", cfg.mnist_test);
    s.read("train_samples", cfg.train_samples);
    s.read("binarize_threshold", cfg.binarize_threshold);
    s.finish();
  }
  if (const json* model = top.child("model")) {
    Section s(*model, "model");
    s.read_path("in", cfg.model_in);
    s.read_path("out", cfg.model_out);
    s.finish();
  }
  if (const json* train = top.child("train")) {
    Section s(*train, "train");
    s.read("n_hidden", cfg.train.n_hidden);
    s.read("epochs", cfg.train.epochs);
    s.read("learning_rate", cfg.train.learning_rate);
    s.read("weight_decay", cfg.train.weight_decay);
    s.read("batch_size", cfg.train.batch_size);
    s.finish();
  }
  if (const json* prior = top.child("prior")) {
    Section s(*prior, "prior");
    s.read_optional("mu", cfg.prior_mu);
    s.read_optional("sigma2", cfg.prior_sigma2);
    s.finish();
  }
  if (const json* sweep = top.child("sweep")) read_sweep(*sweep, cfg.sweep);
  top.finish();
  if (preset != cfg.preset) {
    throw ValidationError(fmt::format(
        "config: preset '{}' does not match the base preset '{}'", preset, cfg.preset));
  }
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path, std::string_view default_preset) {
  std::ifstream f(path);
  if (!f) throw IoError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();

  std::string preset(default_preset);
  try {
    const json doc = json::parse(text);
    if (doc.is_object() && doc.contains("preset") && doc.at("preset").is_string()) {
      preset = doc.at("preset").get<std::string>();
    }
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("config {}: malformed JSON: {}", path.string(), e.what()));
  }
  return overlay_config(preset_config(preset), text);
}

void validate_config(const RunConfig& cfg, Command command) {
  require_range(cfg.jobs >= 1, "jobs must be >= 1");
  require_range(cfg.train_samples >= 0, "data.train_samples must be >= 0");
  require_range(cfg.binarize_threshold >= 0.0 && cfg.binarize_threshold < 1.0,
                "data.binarize_threshold must lie in [0, 1)");
  if (cfg.prior_mu) require_range(std::isfinite(*cfg.prior_mu), "prior.mu must be finite");
  if (cfg.prior_sigma2) {
    require_range(*cfg.prior_sigma2 > 0.0 && std::isfinite(*cfg.prior_sigma2),
                  "prior.sigma2 must be > 0");
  }
  cfg.train.validate();

  switch (command) {
    case Command::Train:
      require_file(cfg.mnist_train, "data.mnist_train");
      if (cfg.model_out.empty()) throw ValidationError("config: model.out is not set");
      break;
    case Command::Sweep: {
      cfg.sweep.validate();
      require_file(cfg.mnist_test, "data.mnist_test");
      const bool need_train_pool =
          !cfg.prior_mu || !cfg.prior_sigma2 ||
          std::find(cfg.sweep.methods.begin(), cfg.sweep.methods.end(), Method::EmpiricalGB) !=
              cfg.sweep.methods.end();
      if (need_train_pool) require_file(cfg.mnist_train, "data.mnist_train");
      for (Method m : cfg.sweep.methods) {
        if (needs_rbm(m)) {
          require_file(cfg.model_in, "model.in");
          break;
        }
      }
      if (cfg.results_dir.empty()) throw ValidationError("config: results_dir is not set");
      break;
    }
    case Command::Inspect:
      require_file(cfg.model_in, "model.in");
      break;
  }
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["preset"] = cfg.preset;
  doc["seed"] = cfg.seed;
  doc["jobs"] = cfg.jobs;
  doc["results_dir"] = cfg.results_dir.string();
  doc["data"] = {{"mnist_train", cfg.mnist_train.string()},
                 {"mnist_test", cfg.mnist_test.string()},
                 {"train_samples", cfg.train_samples},
                 {"binarize_threshold", cfg.binarize_threshold}};
  doc["model"] = {{"in", cfg.model_in.string()}, {"out", cfg.model_out.string()}};
  doc["train"] = {{"n_hidden", cfg.train.n_hidden},
                  {"epochs", cfg.train.epochs},
                  {"learning_rate", cfg.train.learning_rate},
                  {"weight_decay", cfg.train.weight_decay},
                  {"batch_size", cfg.train.batch_size}};
  doc["prior"] = {{"mu", cfg.prior_mu ? json(*cfg.prior_mu) : json(nullptr)},
                  {"sigma2", cfg.prior_sigma2 ? json(*cfg.prior_sigma2) : json(nullptr)}};
  std::vector<std::string> methods;
  for (Method m : cfg.sweep.methods) methods.emplace_back(method_name(m));
  doc["sweep"] = {{"alphas", cfg.sweep.alphas},
                  {"methods", methods},
                  {"n_test", cfg.sweep.n_test},
                  {"n_seeds", cfg.sweep.n_seeds},
                  {"delta", cfg.sweep.delta},
                  {"success_mse", cfg.sweep.success_mse},
                  {"persistent_start", cfg.sweep.persistent_start},
                  {"sensing_variance", sensing_name(cfg.sweep.sensing)},
                  {"visible_init", init_name(cfg.sweep.visible_init)},
                  {"amp",
                   {{"max_iter", cfg.sweep.amp.max_iter},
                    {"tol", cfg.sweep.amp.tol},
                    {"damping", cfg.sweep.amp.damping}}},
                  {"fpi",
                   {{"tol", cfg.sweep.fpi.tol},
                    {"max_iter", cfg.sweep.fpi.max_iter},
                    {"damping", cfg.sweep.fpi.damping}}}};
  return doc.dump(2) + "\n";
}

std::uint64_t training_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, "train"); }
std::uint64_t sweep_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, "sweep"); }

}  // namespace rbmamp
