#include "rbmamp/experiment.hpp"

#include "rbmamp/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace rbmamp {

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::IidGB:
      return "IidGB";
    case Method::EmpiricalGB:
      return "EmpiricalGB";
    case Method::RbmNmf:
      return "RbmNmf";
    case Method::RbmTap:
      return "RbmTap";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::IidGB, Method::EmpiricalGB, Method::RbmNmf, Method::RbmTap}) {
    if (method_name(m) == name) return m;
  }
  throw ValidationError(fmt::format(
      "unknown method '{}' (expected IidGB, EmpiricalGB, RbmNmf or RbmTap)", name));
}

bool needs_rbm(Method m) noexcept { return m == Method::RbmNmf || m == Method::RbmTap; }

void SweepConfig::validate() const {
  if (alphas.empty()) throw ValidationError("sweep: alphas must not be empty");
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] > 0.0 && alphas[k] <= 1.0)) {
      throw ValidationError(fmt::format("sweep: alpha {} outside (0, 1]", alphas[k]));
    }
    if (k > 0 && !(alphas[k] > alphas[k - 1])) {
      throw ValidationError("sweep: alphas must be strictly increasing");
    }
  }
  if (methods.empty()) throw ValidationError("sweep: methods must not be empty");
  if (n_test < 1) throw ValidationError("sweep: n_test must be >= 1");
  if (n_seeds < 1) throw ValidationError("sweep: n_seeds must be >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("sweep: delta must be >= 0");
  if (!(success_mse > 0.0)) throw ValidationError("sweep: success_mse must be > 0");
  if (persistent_start < 1) throw ValidationError("sweep: persistent_start must be >= 1");
  if (jobs < 1) throw ValidationError("sweep: jobs must be >= 1");
  amp.validate();
  fpi.validate();
}

const SummaryRow& SweepResults::at(double alpha, Method method) const {
  for (const SummaryRow& r : summary) {
    if (r.alpha == alpha && r.method == method) return r;
  }
  throw ValidationError(
      fmt::format("no summary row for alpha = {}, method = {}", alpha, method_name(method)));
}

MeasurementModel make_measurement(const Eigen::Ref<const Vector>& x, double alpha, double delta,
                                  Rng& rng, SensingVariance sensing) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError(fmt::format("measurement: alpha = {} outside (0, 1]", alpha));
  }
  const Eigen::Index n = x.size();
  const auto m = static_cast<Eigen::Index>(std::lround(alpha * static_cast<double>(n)));
  if (m < 1) {
    throw ValidationError(
        fmt::format("measurement: alpha = {} gives M = 0 rows for N = {}", alpha, n));
  }
  const double variance = sensing == SensingVariance::InvN
                              ? 1.0 / static_cast<double>(n)
                              : 1.0 / std::sqrt(static_cast<double>(n));
  std::normal_distribution<double> entry(0.0, std::sqrt(variance));
  Matrix F(m, n);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) F(r, c) = entry(rng);
  }
  Vector y = F * x;
  if (delta > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(delta));
    for (Eigen::Index r = 0; r < m; ++r) y[r] += noise(rng);
  }
  return MeasurementModel(std::move(F), std::move(y), delta);
}

double mcc(const Eigen::Ref<const Vector>& support_est, const Eigen::Ref<const Vector>& support_true) {
  if (support_est.size() != support_true.size()) {
    throw ValidationError(fmt::format("mcc: lengths differ ({} vs {})", support_est.size(),
                                      support_true.size()));
  }
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < support_est.size(); ++i) {
    const bool e = support_est[i] != 0.0;
    const bool t = support_true[i] != 0.0;
    if (e && t) {
      ++tp;
    } else if (!e && !t) {
      ++tn;
    } else if (e) {
      ++fp;
    } else {
      ++fn;
    }
  }
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

std::uint64_t trial_seed(std::uint64_t root, double alpha, Eigen::Index image_id, int rep) {
  return derive_seed(root, fmt::format("trial/alpha={}/image={}/rep={}", alpha, image_id, rep));
}

ReconResult reconstruct_one(const Eigen::Ref<const Vector>& x_true, Method method,
                            const PriorModels& models, const SweepConfig& cfg, double alpha,
                            std::uint64_t seed) {
  Rng rng(seed);
  const MeasurementModel model = make_measurement(x_true, alpha, cfg.delta, rng, cfg.sensing);
  const Eigen::Index n = x_true.size();

  AmpResult amp;
  switch (method) {
    case Method::IidGB: {
      BaselineSupportPrior prior(BaselinePrior::iid(sparsity(x_true)));
      amp = run_amp(model, prior, models.gb.mu, models.gb.sigma2, cfg.amp);
      break;
    }
    case Method::EmpiricalGB: {
      if (models.rho_emp.size() != n) {
        throw ValidationError("EmpiricalGB needs per-coefficient empirical rho of length N");
      }
      BaselineSupportPrior prior(BaselinePrior::empirical(models.rho_emp));
      amp = run_amp(model, prior, models.gb.mu, models.gb.sigma2, cfg.amp);
      break;
    }
    case Method::RbmNmf:
    case Method::RbmTap: {
      if (models.rbm == nullptr) {
        throw ValidationError(fmt::format("{} needs an RBM model", method_name(method)));
      }
      FpiOptions fpi = cfg.fpi;
      fpi.method = method == Method::RbmNmf ? Factorization::Nmf : Factorization::Tap;
      RbmSupportPrior prior(*models.rbm, fpi, cfg.persistent_start, cfg.visible_init,
                            derive_seed(seed, "visible-init"));
      amp = run_amp(model, prior, models.gb.mu, models.gb.sigma2, cfg.amp);
      break;
    }
  }

  ReconResult out;
  out.mse = (amp.x_hat - x_true).squaredNorm() / static_cast<double>(n);
  const Vector est = (amp.support_posterior.array() > 0.5).cast<double>().matrix();
  const Vector truth = (x_true.array() != 0.0).cast<double>().matrix();
  out.mcc = mcc(est, truth);
  out.converged = amp.converged;
  out.iters = amp.iters;
  out.x_hat = std::move(amp.x_hat);
  out.support_posterior = std::move(amp.support_posterior);
  return out;
}

std::vector<double> oracle_curve(const Matrix& test_images, const std::vector<double>& alphas) {
  std::vector<double> rhos(static_cast<std::size_t>(test_images.rows()));
  for (Eigen::Index r = 0; r < test_images.rows(); ++r) {
    rhos[static_cast<std::size_t>(r)] = sparsity(test_images.row(r).transpose());
  }
  std::vector<double> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) {
    const auto hits = std::count_if(rhos.begin(), rhos.end(), [&](double r) { return r <= alpha; });
    out.push_back(rhos.empty() ? 0.0
                               : static_cast<double>(hits) / static_cast<double>(rhos.size()));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<DetailRow>& detail, const SweepConfig& cfg,
                                  const std::vector<double>& oracle) {
  std::vector<SummaryRow> out;
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    for (Method m : cfg.methods) {
      SummaryRow row;
      row.alpha = cfg.alphas[a];
      row.method = m;
      row.oracle = a < oracle.size() ? oracle[a] : std::numeric_limits<double>::quiet_NaN();
      std::size_t trials = 0, successes = 0, scored = 0;
      double sum = 0.0;
      for (const DetailRow& d : detail) {
        if (d.alpha != row.alpha || d.method != m) continue;
        ++trials;
        if (d.mse <= cfg.success_mse) ++successes;
        if (!std::isnan(d.mcc)) {
          ++scored;
          sum += d.mcc;
        }
      }
      row.success_rate =
          trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
      row.mcc_mean = scored == 0 ? 0.0 : sum / static_cast<double>(scored);
      double ss = 0.0;
      for (const DetailRow& d : detail) {
        if (d.alpha != row.alpha || d.method != m || std::isnan(d.mcc)) continue;
        ss += (d.mcc - row.mcc_mean) * (d.mcc - row.mcc_mean);
      }
      row.mcc_std = scored == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(scored));
      out.push_back(row);
    }
  }
  return out;
}

SweepResults run_sweep(const SweepConfig& cfg, const ImageSet& test_set, const PriorModels& models,
                       const SweepProgress& progress) {
  cfg.validate();
  if (cfg.n_test > test_set.count()) {
    throw ValidationError(fmt::format("sweep: n_test = {} but the test set holds {} images",
                                      cfg.n_test, test_set.count()));
  }
  for (Method m : cfg.methods) {
    if (needs_rbm(m) && models.rbm == nullptr) {
      throw ValidationError(fmt::format("sweep: method {} requires an RBM model", method_name(m)));
    }
    if (needs_rbm(m) && models.rbm->n_visible() != test_set.pixels()) {
      throw ValidationError(fmt::format("sweep: RBM has {} visible units but images have {} pixels",
                                        models.rbm->n_visible(), test_set.pixels()));
    }
    if (m == Method::EmpiricalGB && models.rho_emp.size() != test_set.pixels()) {
      throw ValidationError("sweep: EmpiricalGB requires per-pixel empirical rho");
    }
  }

  const std::size_t n_alpha = cfg.alphas.size();
  const std::size_t n_method = cfg.methods.size();
  const auto n_image = static_cast<std::size_t>(cfg.n_test);
  const auto n_rep = static_cast<std::size_t>(cfg.n_seeds);
  const std::size_t total = n_alpha * n_method * n_image * n_rep;

  std::vector<DetailRow> detail(total);
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::size_t done = 0;

  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
      const std::size_t rep = k % n_rep;
      const std::size_t image = (k / n_rep) % n_image;
      const std::size_t mi = (k / (n_rep * n_image)) % n_method;
      const std::size_t ai = k / (n_rep * n_image * n_method);

      DetailRow& row = detail[k];
      row.image_id = static_cast<Eigen::Index>(image);
      row.alpha = cfg.alphas[ai];
      row.method = cfg.methods[mi];
      const Vector x = test_set.images.row(row.image_id).transpose();
      row.rho_true = sparsity(x);
      row.seed = trial_seed(cfg.seed, row.alpha, row.image_id, static_cast<int>(rep));
      try {
        const ReconResult r = reconstruct_one(x, row.method, models, cfg, row.alpha, row.seed);
        row.mse = r.mse;
        row.mcc = r.mcc;
        row.converged = r.converged;
        row.iters = r.iters;
      } catch (const DivergenceError& e) {
        row.mse = std::numeric_limits<double>::quiet_NaN();
        row.mcc = std::numeric_limits<double>::quiet_NaN();
        row.converged = false;
        row.iters = e.iteration();
      } catch (const Error&) {
        row.mse = std::numeric_limits<double>::quiet_NaN();
        row.mcc = std::numeric_limits<double>::quiet_NaN();
        row.converged = false;
        row.iters = 0;
      }
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(++done, total);
      }
    }
  };

  const auto n_threads = static_cast<std::size_t>(std::max(1, cfg.jobs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  SweepResults out;
  out.summary = summarize(detail, cfg,
                          oracle_curve(test_set.images.topRows(cfg.n_test), cfg.alphas));
  out.detail = std::move(detail);
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "alpha,method,success_rate,mcc_mean,mcc_std,oracle\n";
  for (const SummaryRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.alpha, method_name(r.method), r.success_rate,
                       r.mcc_mean, r.mcc_std, r.oracle);
  }
  return out;
}

std::string detail_csv(const std::vector<DetailRow>& rows) {
  std::string out = "image_id,alpha,method,rho_true,mse,mcc,converged,iters,seed\n";
  for (const DetailRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.image_id, r.alpha, method_name(r.method),
                       r.rho_true, r.mse, r.mcc, r.converged ? 1 : 0, r.iters, r.seed);
  }
  return out;
}

}  // namespace rbmamp
