#include "rbmamp/gb_amp.hpp"

#include "rbmamp/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace rbmamp {
namespace {

void require_finite(const Vector& v, const char* name, int iter) {
  if (!v.allFinite()) {
    throw DivergenceError(fmt::format("AMP diverged: non-finite {} at iteration {}", name, iter),
                          iter);
  }
}

}  // namespace

MeasurementModel::MeasurementModel(Matrix F, Vector y, double delta)
    : F_(std::move(F)), y_(std::move(y)), delta_(delta) {
  if (F_.rows() < 1) throw ValidationError("measurement model: M must be >= 1");
  if (F_.cols() < 1) throw ValidationError("measurement model: N must be >= 1");
  if (y_.size() != F_.rows()) {
    throw ValidationError(
        fmt::format("measurement model: y has length {} but F has M = {} rows", y_.size(),
                    F_.rows()));
  }
  if (!(delta_ >= 0.0) || !std::isfinite(delta_)) {
    throw ValidationError(fmt::format("measurement model: delta must be >= 0, got {}", delta_));
  }
  if (!F_.allFinite()) throw ValidationError("measurement model: F has non-finite entries");
  if (!y_.allFinite()) throw ValidationError("measurement model: y has non-finite entries");
  F_sq_ = F_.array().square().matrix();
}

void GbPrior::validate(Eigen::Index n) const {
  if (rho.size() != n) {
    throw ValidationError(
        fmt::format("GB prior: rho has length {} but N = {}", rho.size(), n));
  }
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0 && rho[i] <= 1.0)) {
      throw ValidationError(fmt::format("GB prior: rho[{}] = {} outside [0, 1]", i, rho[i]));
    }
  }
  if (!std::isfinite(mu)) throw ValidationError("GB prior: mu must be finite");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ValidationError(fmt::format("GB prior: sigma2 must be > 0, got {}", sigma2));
  }
}

void AmpOptions::validate() const {
  if (max_iter < 1) throw ValidationError("AMP options: max_iter must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("AMP options: tol must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw ValidationError(fmt::format("AMP options: damping must lie in (0, 1], got {}", damping));
  }
}

double support_log_likelihood_ratio(double R, double S, double mu, double sigma2) {
  const double total = sigma2 + S;
  const double dr = R - mu;
  // 0.5 ln(S / (sigma2 + S)) - (R - mu)^2 / 2(sigma2 + S) + R^2 / 2S
  return -0.5 * std::log1p(sigma2 / S) - 0.5 * dr * dr / total + 0.5 * R * R / S;
}

Posterior denoise_log_odds(double R, double S, double log_odds, double mu, double sigma2) {
  if (!std::isfinite(R) || !std::isfinite(S) || !std::isfinite(mu) || !std::isfinite(sigma2) ||
      std::isnan(log_odds)) {
    throw ValidationError(fmt::format(
        "denoise: non-finite input (R = {}, S = {}, log_odds = {}, mu = {}, sigma2 = {})", R, S,
        log_odds, mu, sigma2));
  }
  if (!(S > 0.0)) throw ValidationError(fmt::format("denoise: S must be > 0, got {}", S));
  if (!(sigma2 > 0.0)) {
    throw ValidationError(fmt::format("denoise: sigma2 must be > 0, got {}", sigma2));
  }

  const double ln_g = support_log_likelihood_ratio(R, S, mu, sigma2);
  const double z = log_odds + ln_g;
  const double pi = sigmoid(z);
  const double off = sigmoid(-z);

  const double total = S + sigma2;
  const double slab_mean = (R * sigma2 + mu * S) / total;
  const double slab_var = S * sigma2 / total;

  Posterior out;
  out.ln_g = ln_g;
  out.pi = pi;
  out.a = pi * slab_mean;
  out.c = pi * slab_var + pi * off * slab_mean * slab_mean;
  return out;
}

Posterior denoise(double R, double S, double rho, double mu, double sigma2) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw ValidationError(fmt::format("denoise: rho must lie in [0, 1], got {}", rho));
  }
  return denoise_log_odds(R, S, logit(rho), mu, sigma2);
}

AmpState init_state(const MeasurementModel& model, const GbPrior& prior) {
  const Eigen::Index n = model.cols();
  prior.validate(n);

  AmpState s;
  s.a = prior.rho * prior.mu;
  s.c = (prior.rho.array() * prior.sigma2 +
         prior.rho.array() * (1.0 - prior.rho.array()) * prior.mu * prior.mu)
            .matrix();
  s.omega = model.F() * s.a;
  s.V = model.F_squared() * s.c;
  s.R = Vector::Zero(n);
  s.S = Vector::Zero(n);
  s.ln_g = Vector::Zero(n);
  s.pi = prior.rho;
  s.iter = 0;
  return s;
}

void update_messages(AmpState& s, const MeasurementModel& model, double mu, double sigma2) {
  if (s.a.size() != model.cols() || s.c.size() != model.cols()) {
    throw ValidationError(fmt::format("AMP state: a/c length {} does not match N = {}",
                                      s.a.size(), model.cols()));
  }
  if (s.V.size() != model.rows() || s.omega.size() != model.rows()) {
    throw ValidationError(fmt::format("AMP state: V/omega length {} does not match M = {}",
                                      s.V.size(), model.rows()));
  }
  const double delta = model.delta();
  const Vector& y = model.y();

  Vector V = model.F_squared() * s.c;
  Vector omega = model.F() * s.a;
  if (s.iter > 0) {
    omega.array() -= V.array() * (y - s.omega).array() / (delta + s.V.array());
  }
  const Vector inv = (delta + V.array()).inverse().matrix();
  const Vector residual = ((y - omega).array() * inv.array()).matrix();

  s.S = (model.F_squared().transpose() * inv).array().inverse().matrix();
  s.R = (s.a.array() + s.S.array() * (model.F().transpose() * residual).array()).matrix();
  s.V = std::move(V);
  s.omega = std::move(omega);

  require_finite(s.V, "V", s.iter);
  require_finite(s.omega, "omega", s.iter);
  require_finite(s.S, "S", s.iter);
  require_finite(s.R, "R", s.iter);
  if (!(s.S.array() > 0.0).all()) {
    throw DivergenceError(
        fmt::format("AMP diverged: cavity variance S collapsed to 0 at iteration {}", s.iter),
        s.iter);
  }

  // ln g does not depend on rho, so it is available before the prior is consulted.
  s.ln_g.resize(s.R.size());
  for (Eigen::Index i = 0; i < s.R.size(); ++i) {
    s.ln_g[i] = support_log_likelihood_ratio(s.R[i], s.S[i], mu, sigma2);
  }
}

void update_estimates(AmpState& s, const Eigen::Ref<const Vector>& log_odds, double mu,
                      double sigma2, double damping) {
  const Eigen::Index n = s.R.size();
  if (log_odds.size() != n) {
    throw ValidationError(
        fmt::format("support prior returned {} log-odds for N = {}", log_odds.size(), n));
  }
  s.pi.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Posterior p = denoise_log_odds(s.R[i], s.S[i], log_odds[i], mu, sigma2);
    s.a[i] = (1.0 - damping) * s.a[i] + damping * p.a;
    s.c[i] = (1.0 - damping) * s.c[i] + damping * p.c;
    s.pi[i] = p.pi;
  }
  require_finite(s.a, "a", s.iter);
  require_finite(s.c, "c", s.iter);
  ++s.iter;
}

AmpState amp_iterate(const AmpState& state, const MeasurementModel& model, const GbPrior& prior,
                     const AmpOptions& opts) {
  opts.validate();
  prior.validate(model.cols());
  AmpState next = state;
  update_messages(next, model, prior.mu, prior.sigma2);
  Vector log_odds(prior.rho.size());
  for (Eigen::Index i = 0; i < log_odds.size(); ++i) log_odds[i] = logit(prior.rho[i]);
  update_estimates(next, log_odds, prior.mu, prior.sigma2, opts.damping);
  return next;
}

AmpResult run_amp(const MeasurementModel& model, SupportPrior& prior, double mu, double sigma2,
                  const AmpOptions& opts) {
  return run_amp(model, prior, mu, sigma2, opts, {});
}

AmpResult run_amp(const MeasurementModel& model, SupportPrior& prior, double mu, double sigma2,
                  const AmpOptions& opts, const AmpObserver& observer) {
  opts.validate();
  const Eigen::Index n = model.cols();

  GbPrior start;
  start.mu = mu;
  start.sigma2 = sigma2;
  const Vector initial = prior.initial_log_odds(n);
  if (initial.size() != n) {
    throw ValidationError(
        fmt::format("support prior returned {} initial log-odds for N = {}", initial.size(), n));
  }
  start.rho = initial.unaryExpr([](double l) { return sigmoid(l); });
  AmpState state = init_state(model, start);

  AmpResult result;
  const double tol2 = opts.tol * opts.tol;
  while (state.iter < opts.max_iter) {
    update_messages(state, model, mu, sigma2);
    const Vector log_odds = prior.log_odds(state.ln_g, state.iter + 1);
    const Vector a_prev = state.a;
    update_estimates(state, log_odds, mu, sigma2, opts.damping);
    if (observer) observer(state);
    const double mean_sq_change = (state.a - a_prev).squaredNorm() / static_cast<double>(n);
    if (mean_sq_change < tol2) {
      result.converged = true;
      break;
    }
  }
  result.x_hat = state.a;
  result.support_posterior = state.pi;
  result.iters = state.iter;
  return result;
}

}  // namespace rbmamp
