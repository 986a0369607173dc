#include "rbmamp/rbm_prior.hpp"

#include "rbmamp/error.hpp"

#include <fmt/format.h>

namespace rbmamp {

double rho_from_magnetization(double m_v, double ln_g) {
  const double m = clamp_mean(m_v);
  return sigmoid(std::log(m) - std::log1p(-m) - ln_g);
}

Vector rho_from_magnetization(const Eigen::Ref<const Vector>& m_v,
                              const Eigen::Ref<const Vector>& ln_g) {
  if (m_v.size() != ln_g.size()) {
    throw ValidationError(fmt::format("rho_from_magnetization: {} means but {} fields",
                                      m_v.size(), ln_g.size()));
  }
  Vector rho(m_v.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) rho[i] = rho_from_magnetization(m_v[i], ln_g[i]);
  return rho;
}

RbmSupportPrior::RbmSupportPrior(const BinaryRbm& rbm, FpiOptions fpi, int persistent_start,
                                 VisibleInit init, std::uint64_t init_seed)
    : rbm_(&rbm),
      fpi_(fpi),
      persistent_start_(persistent_start),
      init_(init),
      init_rng_(init_seed) {
  rbm.validate();
  fpi_.validate();
  if (persistent_start_ < 1) throw ValidationError("RBM prior: persistent_start must be >= 1");
  mags_ = MagnetizationState::zeros(rbm.n_visible(), rbm.n_hidden());
}

MagnetizationState RbmSupportPrior::fresh_state() {
  MagnetizationState s = MagnetizationState::zeros(rbm_->n_visible(), rbm_->n_hidden());
  if (init_ == VisibleInit::SampleFromBias) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < s.m_v.size(); ++i) {
      s.m_v[i] = unif(init_rng_) < sigmoid(rbm_->vbias[i]) ? 1.0 : 0.0;
    }
  }
  return s;
}

Vector RbmSupportPrior::initial_log_odds(Eigen::Index n) {
  if (n != rbm_->n_visible()) {
    throw ValidationError(
        fmt::format("RBM prior has {} visible units but the signal has {} coefficients",
                    rbm_->n_visible(), n));
  }
  const FpiResult r = solve_fpi(*rbm_, Vector::Zero(n), fpi_,
                                MagnetizationState::zeros(rbm_->n_visible(), rbm_->n_hidden()));
  return r.visible_input;
}

Vector RbmSupportPrior::log_odds(const Vector& ln_g, int iter) {
  if (ln_g.size() != rbm_->n_visible()) {
    throw ValidationError(fmt::format("RBM prior: field has length {} but n_v = {}", ln_g.size(),
                                      rbm_->n_visible()));
  }
  if (iter < persistent_start_) {
    FpiResult r = solve_fpi(*rbm_, ln_g, fpi_, fresh_state());
    if (!r.converged) ++unconverged_;
    fpi_sweeps_ += r.iters;
    mags_ = std::move(r.state);
    return r.visible_input;
  }
  Vector input;
  mags_ = fpi_step(*rbm_, ln_g, mags_, fpi_.method, &input);
  ++fpi_sweeps_;
  return input;
}

Vector RbmSupportPrior::update_support(const Vector& ln_g, int amp_iter) {
  return log_odds(ln_g, amp_iter).unaryExpr([](double l) { return sigmoid(l); });
}

BaselinePrior BaselinePrior::iid(double rho) {
  BaselinePrior p{BaselineKind::IidGB, Vector::Constant(1, rho)};
  p.validate();
  return p;
}

BaselinePrior BaselinePrior::empirical(Vector rho) {
  BaselinePrior p{BaselineKind::EmpiricalGB, std::move(rho)};
  p.validate();
  return p;
}

void BaselinePrior::validate() const {
  if (kind == BaselineKind::IidGB && rho.size() != 1) {
    throw ValidationError("iid GB prior takes exactly one rho");
  }
  if (rho.size() < 1) throw ValidationError("baseline prior: empty rho");
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0 && rho[i] <= 1.0)) {
      throw ValidationError(fmt::format("baseline prior: rho[{}] = {} outside [0, 1]", i, rho[i]));
    }
  }
}

Vector baseline_rho(const BaselinePrior& prior, Eigen::Index n) {
  prior.validate();
  if (prior.kind == BaselineKind::IidGB) return Vector::Constant(n, prior.rho[0]);
  if (prior.rho.size() != n) {
    throw ValidationError(fmt::format("empirical prior has {} entries but N = {}",
                                      prior.rho.size(), n));
  }
  return prior.rho;
}

BaselineSupportPrior::BaselineSupportPrior(BaselinePrior prior) : prior_(std::move(prior)) {
  prior_.validate();
}

Vector BaselineSupportPrior::initial_log_odds(Eigen::Index n) {
  cached_ = baseline_rho(prior_, n).unaryExpr([](double r) { return logit(r); });
  return cached_;
}

Vector BaselineSupportPrior::log_odds(const Vector& ln_g, int /*iter*/) {
  if (cached_.size() != ln_g.size()) initial_log_odds(ln_g.size());
  return cached_;
}

}  // namespace rbmamp
