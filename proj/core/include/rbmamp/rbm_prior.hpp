#pragma once

// Support priors for the AMP solver: the RBM-driven prior (mean-field or TAP
// factorization of the RBM with the AMP evidence as a visible field) and the
// two baselines with fixed per-coefficient sparsities.

#include "rbmamp/gb_amp.hpp"
#include "rbmamp/rbm.hpp"

#include <cstdint>
#include <limits>

namespace rbmamp {

/// rho = sigm(ln m - ln(1 - m) - ln g), with m clamped to [eps, 1 - eps].
double rho_from_magnetization(double m_v, double ln_g);
Vector rho_from_magnetization(const Eigen::Ref<const Vector>& m_v,
                              const Eigen::Ref<const Vector>& ln_g);

enum class VisibleInit { Zero, SampleFromBias };

inline constexpr int kNeverPersist = std::numeric_limits<int>::max();

/// RBM support prior bound to a single reconstruction.
///
/// Before sweep `persistent_start` the magnetizations are reset and the FPI
/// is run to convergence on every call; from then on a single hidden/visible
/// step is taken from the persisted state. The returned log-odds are the
/// field-free visible input of the last visible update, which equals
/// logit(m_v) - ln g whenever m_v = sigm(input + ln g).
class RbmSupportPrior final : public SupportPrior {
 public:
  RbmSupportPrior(const BinaryRbm& rbm, FpiOptions fpi, int persistent_start = 50,
                  VisibleInit init = VisibleInit::Zero, std::uint64_t init_seed = 0);

  Vector initial_log_odds(Eigen::Index n) override;
  Vector log_odds(const Vector& ln_g, int iter) override;

  /// Prior sparsities sigm(log_odds(ln_g, iter)), in (0, 1)^n.
  Vector update_support(const Vector& ln_g, int amp_iter);

  const MagnetizationState& magnetizations() const noexcept { return mags_; }
  int persistent_start() const noexcept { return persistent_start_; }
  /// Number of warm-up calls whose FPI hit max_iter without converging.
  int unconverged_solves() const noexcept { return unconverged_; }
  int total_fpi_sweeps() const noexcept { return fpi_sweeps_; }

 private:
  MagnetizationState fresh_state();

  const BinaryRbm* rbm_;
  FpiOptions fpi_;
  int persistent_start_;
  VisibleInit init_;
  Rng init_rng_;
  MagnetizationState mags_;
  int unconverged_ = 0;
  int fpi_sweeps_ = 0;
};

enum class BaselineKind { IidGB, EmpiricalGB };

struct BaselinePrior {
  BaselineKind kind = BaselineKind::IidGB;
  Vector rho;  // one entry for IidGB, N entries for EmpiricalGB

  static BaselinePrior iid(double rho);
  static BaselinePrior empirical(Vector rho);
  void validate() const;
};

/// Constant rho vector of length n (IidGB broadcasts its scalar).
Vector baseline_rho(const BaselinePrior& prior, Eigen::Index n);

/// Adapter exposing a BaselinePrior to run_amp; log-odds are constant in time.
class BaselineSupportPrior final : public SupportPrior {
 public:
  explicit BaselineSupportPrior(BaselinePrior prior);

  Vector initial_log_odds(Eigen::Index n) override;
  Vector log_odds(const Vector& ln_g, int iter) override;

 private:
  BaselinePrior prior_;
  Vector cached_;
};

}  // namespace rbmamp
