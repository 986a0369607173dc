#pragma once

// Compressed-sensing experiments on image test sets: measurement generation,
// the four reconstruction methods, support metrics and sweep tabulation.

#include "rbmamp/dataset.hpp"
#include "rbmamp/gb_amp.hpp"
#include "rbmamp/rbm.hpp"
#include "rbmamp/rbm_prior.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace rbmamp {

enum class Method { IidGB, EmpiricalGB, RbmNmf, RbmTap };

std::string_view method_name(Method m) noexcept;
/// Accepts the names printed by method_name; throws ValidationError otherwise.
Method parse_method(std::string_view name);
bool needs_rbm(Method m) noexcept;

/// Variance of the iid Gaussian entries of F.
enum class SensingVariance { InvN, InvSqrtN };

struct SweepConfig {
  std::vector<double> alphas;
  std::vector<Method> methods;
  int n_test = 300;
  int n_seeds = 1;  // independent measurement draws per (alpha, image)
  double delta = 1e-8;
  std::uint64_t seed = 0;
  double success_mse = 1e-4;
  AmpOptions amp;
  FpiOptions fpi;  // `method` is overridden by RbmNmf / RbmTap
  int persistent_start = 50;
  VisibleInit visible_init = VisibleInit::Zero;
  SensingVariance sensing = SensingVariance::InvN;
  int jobs = 1;

  void validate() const;
};

/// Everything a reconstruction may need besides the measurement itself.
struct PriorModels {
  const BinaryRbm* rbm = nullptr;  // RbmNmf / RbmTap
  Vector rho_emp;                  // EmpiricalGB
  GbParams gb;                     // slab mean / variance shared by every method
};

struct ReconResult {
  Vector x_hat;
  Vector support_posterior;
  double mse = 0.0;
  double mcc = 0.0;
  bool converged = false;
  int iters = 0;
};

/// M = round(alpha N) rows of iid Gaussian F, y = F x + N(0, delta) noise.
MeasurementModel make_measurement(const Eigen::Ref<const Vector>& x, double alpha, double delta,
                                  Rng& rng, SensingVariance sensing = SensingVariance::InvN);

/// Matthews correlation of two binary vectors; 0 when any marginal is empty.
double mcc(const Eigen::Ref<const Vector>& support_est, const Eigen::Ref<const Vector>& support_true);

/// Seed of the measurement shared by every method for one (alpha, image, repeat).
std::uint64_t trial_seed(std::uint64_t root, double alpha, Eigen::Index image_id, int rep);

/// Measures x_true with a draw seeded by `seed`, reconstructs it with `method`,
/// scores MSE and support MCC (support estimate: posterior > 1/2).
ReconResult reconstruct_one(const Eigen::Ref<const Vector>& x_true, Method method,
                            const PriorModels& models, const SweepConfig& cfg, double alpha,
                            std::uint64_t seed);

struct DetailRow {
  Eigen::Index image_id = 0;
  double alpha = 0.0;
  Method method = Method::IidGB;
  double rho_true = 0.0;
  double mse = 0.0;  // NaN when the reconstruction diverged
  double mcc = 0.0;  // NaN when the reconstruction diverged
  bool converged = false;
  int iters = 0;
  std::uint64_t seed = 0;
};

struct SummaryRow {
  double alpha = 0.0;
  Method method = Method::IidGB;
  double success_rate = 0.0;
  double mcc_mean = 0.0;
  double mcc_std = 0.0;  // population standard deviation
  double oracle = 0.0;
};

struct SweepResults {
  std::vector<SummaryRow> summary;  // ordered by (alpha, method)
  std::vector<DetailRow> detail;    // ordered by (alpha, method, image, repeat)

  /// Summary row for (alpha, method); throws if absent.
  const SummaryRow& at(double alpha, Method method) const;
};

/// Fraction of images whose non-zero fraction rho satisfies rho <= alpha, per alpha.
std::vector<double> oracle_curve(const Matrix& test_images, const std::vector<double>& alphas);

/// Aggregates detail rows in order. Diverged rows count as failures and are
/// left out of the MCC statistics.
std::vector<SummaryRow> summarize(const std::vector<DetailRow>& detail, const SweepConfig& cfg,
                                  const std::vector<double>& oracle);

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (alpha, method, image, repeat) on up to cfg.jobs threads. Output
/// order never depends on scheduling. Failed reconstructions become rows.
SweepResults run_sweep(const SweepConfig& cfg, const ImageSet& test_set, const PriorModels& models,
                       const SweepProgress& progress = {});

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string detail_csv(const std::vector<DetailRow>& rows);

}  // namespace rbmamp
