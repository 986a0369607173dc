#pragma once

// Binary restricted Boltzmann machine with energy
//   E(v, h) = -vbias.v - hbias.h - v^T W h
// and its naive mean-field (NMF) and second-order TAP factorizations.
//
// Every visible-side function takes an external field (one entry per visible
// unit) that enters exactly like an extra visible bias. A zero field gives
// the plain RBM.

#include "rbmamp/numeric.hpp"
#include "rbmamp/random.hpp"

#include <cstdint>
#include <functional>

namespace rbmamp {

enum class Factorization { Nmf, Tap };

struct BinaryRbm {
  Vector vbias;  // length n_v
  Vector hbias;  // length n_h
  Matrix W;      // n_v x n_h

  Eigen::Index n_visible() const noexcept { return vbias.size(); }
  Eigen::Index n_hidden() const noexcept { return hbias.size(); }

  /// Throws ValidationError on inconsistent shapes or non-finite parameters.
  void validate() const;

  static BinaryRbm zeros(Eigen::Index n_visible, Eigen::Index n_hidden);
};

struct MagnetizationState {
  Vector m_v;
  Vector m_h;

  Vector v_v() const { return (m_v.array() * (1.0 - m_v.array())).matrix(); }
  Vector v_h() const { return (m_h.array() * (1.0 - m_h.array())).matrix(); }

  static MagnetizationState zeros(Eigen::Index n_visible, Eigen::Index n_hidden);
};

struct FpiOptions {
  Factorization method = Factorization::Tap;
  double tol = 1e-6;     // on max |change of m_v|
  int max_iter = 200;
  double damping = 0.5;  // fraction of each fresh layer update kept

  void validate() const;
};

/// Hidden means from visible means. TAP reads m_h_prev in its (1/2 - m_h) factor.
Vector hidden_update(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_v,
                     Factorization method, const Eigen::Ref<const Vector>& m_h_prev);

/// Field-free sigmoid argument of the visible update:
///   vbias + W m_h [+ (1/2 - m_v_prev) . (W^2 v_h) for TAP].
Vector visible_input(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_h,
                     Factorization method, const Eigen::Ref<const Vector>& m_v_prev);

/// Visible means sigm(visible_input + field), clamped to [eps, 1 - eps].
Vector visible_update(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_h,
                      const Eigen::Ref<const Vector>& field, Factorization method,
                      const Eigen::Ref<const Vector>& m_v_prev);

/// NMF or TAP Gibbs free energy including the -field.m_v term.
/// Means are clamped to [eps, 1 - eps]; anything outside [0, 1] (or NaN) throws.
double free_energy(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_v,
                   const Eigen::Ref<const Vector>& m_h, const Eigen::Ref<const Vector>& field,
                   Factorization method);

struct FpiResult {
  MagnetizationState state;
  Vector visible_input;  // field-free argument of the last visible update
  bool converged = false;
  int iters = 0;
};

/// One undamped hidden-then-visible sweep.
/// If `input_out` is non-null it receives the field-free visible input used.
MagnetizationState fpi_step(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& field,
                            const MagnetizationState& state, Factorization method,
                            Vector* input_out = nullptr);

/// Damped hidden-then-visible sweeps until max |change of m_v| < tol.
/// Oscillation or slow convergence is reported as converged = false.
FpiResult solve_fpi(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& field,
                    const FpiOptions& opts, const MagnetizationState& init);

struct ExactMarginals {
  Vector pv;  // P(v_i = 1)
  Vector ph;  // P(h_j = 1)
  double ln_z = 0.0;
};

inline constexpr int kMaxEnumerationUnits = 24;

/// Brute-force sum over all 2^(n_v + n_h) joint states of exp(-E(v, h) + field.v).
ExactMarginals exact_enumeration(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& field);

/// Mean log-likelihood of binary rows under the RBM, via exact_enumeration's ln Z.
double exact_log_likelihood(const BinaryRbm& rbm, const Matrix& data);

/// One pass of CD-1 over shuffled minibatches. Rows of `data` must be binary.
BinaryRbm cd1_epoch(const BinaryRbm& rbm, const Matrix& data, double learning_rate,
                    double weight_decay, int batch_size, Rng& rng);

struct TrainSpec {
  int n_hidden = 500;
  int epochs = 100;
  double learning_rate = 0.005;
  double weight_decay = 0.001;
  int batch_size = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Called after each epoch with the 1-based epoch number and the current model.
using EpochCallback = std::function<void(int, const BinaryRbm&)>;

/// W ~ N(0, 0.01^2), zero biases, then `epochs` CD-1 passes. Deterministic in spec.seed.
BinaryRbm train_rbm(const TrainSpec& spec, const Matrix& data,
                    const EpochCallback& on_epoch = {});

/// Mean squared error between binary rows and their one-step mean-field reconstruction.
double reconstruction_error(const BinaryRbm& rbm, const Matrix& data);

}  // namespace rbmamp
