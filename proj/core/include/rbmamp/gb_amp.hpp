#pragma once

// Approximate message passing for y = F x + w, w ~ N(0, delta), under a
// Gauss-Bernoulli (spike-and-slab) prior with per-coefficient sparsity.
//
// The solver talks to its prior through support log-odds
// lambda_i = ln(rho_i / (1 - rho_i)) rather than rho_i itself. Both the
// baseline priors and the RBM prior produce log-odds natively, and
// sigm(lambda + ln g) is the only place rho enters the posterior.

#include "rbmamp/numeric.hpp"

#include <functional>

namespace rbmamp {

/// Linear AWGN channel. Immutable once constructed; safe to share across threads.
class MeasurementModel {
 public:
  MeasurementModel(Matrix F, Vector y, double delta);

  const Matrix& F() const noexcept { return F_; }
  /// Element-wise square of F, cached for the variance updates.
  const Matrix& F_squared() const noexcept { return F_sq_; }
  const Vector& y() const noexcept { return y_; }
  double delta() const noexcept { return delta_; }
  Eigen::Index rows() const noexcept { return F_.rows(); }
  Eigen::Index cols() const noexcept { return F_.cols(); }

 private:
  Matrix F_;
  Matrix F_sq_;
  Vector y_;
  double delta_;
};

struct GbPrior {
  Vector rho;
  double mu = 0.0;
  double sigma2 = 1.0;

  void validate(Eigen::Index n) const;
};

struct AmpState {
  Vector a;      // posterior means
  Vector c;      // posterior variances
  Vector V;      // variance messages, length M
  Vector omega;  // mean messages, length M
  Vector R;      // cavity means
  Vector S;      // cavity variances
  Vector ln_g;   // support log-likelihood ratios ln Z_on - ln Z_off
  Vector pi;     // posterior support probabilities
  int iter = 0;
};

struct AmpOptions {
  int max_iter = 300;
  double tol = 1e-8;     // on the root-mean-square change of a
  double damping = 0.5;  // fraction of the freshly computed (a, c) kept

  void validate() const;
};

/// Scalar spike-and-slab posterior summary.
struct Posterior {
  double a;     // mean
  double c;     // variance
  double ln_g;  // ln Z_on - ln Z_off, independent of rho
  double pi;    // P(x != 0 | R, S)
};

/// ln N(R; mu, sigma2 + S) - ln N(0; R, S).
double support_log_likelihood_ratio(double R, double S, double mu, double sigma2);

/// Posterior of x under [(1-rho) delta(x) + rho N(x; mu, sigma2)] N(x; R, S).
/// Throws ValidationError on non-finite input or S, sigma2 <= 0.
Posterior denoise(double R, double S, double rho, double mu, double sigma2);

/// Same posterior with the prior given as log-odds ln(rho / (1 - rho)).
/// log_odds may be +/-inf (rho = 1 / rho = 0).
Posterior denoise_log_odds(double R, double S, double log_odds, double mu, double sigma2);

/// a = prior mean, c = prior variance, omega = F a, V = F^2 c, iter = 0.
AmpState init_state(const MeasurementModel& model, const GbPrior& prior);

/// V/omega then R/S then ln g, in place. Onsager memory term is dropped at iter 0.
void update_messages(AmpState& state, const MeasurementModel& model, double mu, double sigma2);

/// Denoise every coefficient with the given log-odds, damp (a, c), bump iter.
void update_estimates(AmpState& state, const Eigen::Ref<const Vector>& log_odds, double mu,
                      double sigma2, double damping);

/// One full sweep with a fixed prior. Throws DivergenceError on any non-finite value.
AmpState amp_iterate(const AmpState& state, const MeasurementModel& model, const GbPrior& prior,
                     const AmpOptions& opts);

/// Source of per-coefficient support log-odds for run_amp.
///
/// `log_odds` is invoked once per sweep, after the R/S update and before the
/// denoiser, with the current evidence ln g and the 1-based sweep number.
class SupportPrior {
 public:
  virtual ~SupportPrior() = default;
  /// Log-odds used to initialise (a, c) before any evidence exists.
  virtual Vector initial_log_odds(Eigen::Index n) = 0;
  virtual Vector log_odds(const Vector& ln_g, int iter) = 0;
};

struct AmpResult {
  Vector x_hat;
  Vector support_posterior;
  bool converged = false;
  int iters = 0;
};

/// Runs AMP until the RMS change of a drops below tol or max_iter sweeps.
/// Non-convergence is reported through `converged`; divergence throws.
AmpResult run_amp(const MeasurementModel& model, SupportPrior& prior, double mu, double sigma2,
                  const AmpOptions& opts);

/// Optional per-sweep observer, called after each completed sweep.
using AmpObserver = std::function<void(const AmpState&)>;

AmpResult run_amp(const MeasurementModel& model, SupportPrior& prior, double mu, double sigma2,
                  const AmpOptions& opts, const AmpObserver& observer);

}  // namespace rbmamp
