#include "rbmamp/rbm.hpp"

#include "rbmamp/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rbmamp {
namespace {

void check_length(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw ValidationError(fmt::format("{}: length {} does not match {}", what, got, want));
  }
}

Vector sigmoid_clamped(const Vector& x) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = clamp_mean(sigmoid(x[i]));
  return out;
}

Matrix sigmoid_rows(const Matrix& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

double entropy_term(double m) { return m * std::log(m) + (1.0 - m) * std::log1p(-m); }

Vector hidden_update_with(const BinaryRbm& rbm, const Matrix& W_sq,
                          const Eigen::Ref<const Vector>& m_v, Factorization method,
                          const Eigen::Ref<const Vector>& m_h_prev) {
  Vector act = rbm.hbias + rbm.W.transpose() * m_v;
  if (method == Factorization::Tap) {
    const Vector v_v = (m_v.array() * (1.0 - m_v.array())).matrix();
    act.array() += (0.5 - m_h_prev.array()) * (W_sq.transpose() * v_v).array();
  }
  return sigmoid_clamped(act);
}

Vector visible_input_with(const BinaryRbm& rbm, const Matrix& W_sq,
                          const Eigen::Ref<const Vector>& m_h, Factorization method,
                          const Eigen::Ref<const Vector>& m_v_prev) {
  Vector act = rbm.vbias + rbm.W * m_h;
  if (method == Factorization::Tap) {
    const Vector v_h = (m_h.array() * (1.0 - m_h.array())).matrix();
    act.array() += (0.5 - m_v_prev.array()) * (W_sq * v_h).array();
  }
  return act;
}

void check_shapes(const BinaryRbm& rbm, const MagnetizationState& s, Eigen::Index field_len) {
  check_length(s.m_v.size(), rbm.n_visible(), "visible means");
  check_length(s.m_h.size(), rbm.n_hidden(), "hidden means");
  check_length(field_len, rbm.n_visible(), "visible field");
}

}  // namespace

void BinaryRbm::validate() const {
  if (vbias.size() < 1 || hbias.size() < 1) {
    throw ValidationError("RBM: n_v and n_h must both be >= 1");
  }
  if (W.rows() != vbias.size() || W.cols() != hbias.size()) {
    throw ValidationError(fmt::format("RBM: W is {}x{} but n_v = {}, n_h = {}", W.rows(),
                                      W.cols(), vbias.size(), hbias.size()));
  }
  if (!vbias.allFinite() || !hbias.allFinite() || !W.allFinite()) {
    throw ValidationError("RBM: parameters must be finite");
  }
}

BinaryRbm BinaryRbm::zeros(Eigen::Index n_visible, Eigen::Index n_hidden) {
  return BinaryRbm{Vector::Zero(n_visible), Vector::Zero(n_hidden),
                   Matrix::Zero(n_visible, n_hidden)};
}

MagnetizationState MagnetizationState::zeros(Eigen::Index n_visible, Eigen::Index n_hidden) {
  return MagnetizationState{Vector::Zero(n_visible), Vector::Zero(n_hidden)};
}

void FpiOptions::validate() const {
  if (!(tol > 0.0)) throw ValidationError("FPI options: tol must be > 0");
  if (max_iter < 1) throw ValidationError("FPI options: max_iter must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw ValidationError(fmt::format("FPI options: damping must lie in (0, 1], got {}", damping));
  }
}

Vector hidden_update(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_v,
                     Factorization method, const Eigen::Ref<const Vector>& m_h_prev) {
  check_length(m_v.size(), rbm.n_visible(), "visible means");
  check_length(m_h_prev.size(), rbm.n_hidden(), "previous hidden means");
  const Matrix W_sq = method == Factorization::Tap ? Matrix(rbm.W.array().square()) : Matrix();
  return hidden_update_with(rbm, W_sq, m_v, method, m_h_prev);
}

Vector visible_input(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_h,
                     Factorization method, const Eigen::Ref<const Vector>& m_v_prev) {
  check_length(m_h.size(), rbm.n_hidden(), "hidden means");
  check_length(m_v_prev.size(), rbm.n_visible(), "previous visible means");
  const Matrix W_sq = method == Factorization::Tap ? Matrix(rbm.W.array().square()) : Matrix();
  return visible_input_with(rbm, W_sq, m_h, method, m_v_prev);
}

Vector visible_update(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_h,
                      const Eigen::Ref<const Vector>& field, Factorization method,
                      const Eigen::Ref<const Vector>& m_v_prev) {
  check_length(field.size(), rbm.n_visible(), "visible field");
  return sigmoid_clamped(visible_input(rbm, m_h, method, m_v_prev) + field);
}

double free_energy(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& m_v,
                   const Eigen::Ref<const Vector>& m_h, const Eigen::Ref<const Vector>& field,
                   Factorization method) {
  check_length(m_v.size(), rbm.n_visible(), "visible means");
  check_length(m_h.size(), rbm.n_hidden(), "hidden means");
  check_length(field.size(), rbm.n_visible(), "visible field");
  auto clamp_checked = [](const Eigen::Ref<const Vector>& m, const char* layer) {
    Vector out(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (!(m[i] >= 0.0 && m[i] <= 1.0)) {
        throw ValidationError(
            fmt::format("free energy: {} mean [{}] = {} outside [0, 1]", layer, i, m[i]));
      }
      out[i] = clamp_mean(m[i]);
    }
    return out;
  };
  const Vector mv = clamp_checked(m_v, "visible");
  const Vector mh = clamp_checked(m_h, "hidden");

  double f = -rbm.vbias.dot(mv) - rbm.hbias.dot(mh) - mv.dot(rbm.W * mh) - field.dot(mv);
  for (Eigen::Index i = 0; i < mv.size(); ++i) f += entropy_term(mv[i]);
  for (Eigen::Index j = 0; j < mh.size(); ++j) f += entropy_term(mh[j]);
  if (method == Factorization::Tap) {
    const Vector v_v = (mv.array() * (1.0 - mv.array())).matrix();
    const Vector v_h = (mh.array() * (1.0 - mh.array())).matrix();
    f -= 0.5 * v_v.dot(rbm.W.array().square().matrix() * v_h);
  }
  return f;
}

MagnetizationState fpi_step(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& field,
                            const MagnetizationState& state, Factorization method,
                            Vector* input_out) {
  check_shapes(rbm, state, field.size());
  const Matrix W_sq = method == Factorization::Tap ? Matrix(rbm.W.array().square()) : Matrix();
  MagnetizationState next;
  next.m_h = hidden_update_with(rbm, W_sq, state.m_v, method, state.m_h);
  Vector input = visible_input_with(rbm, W_sq, next.m_h, method, state.m_v);
  next.m_v = sigmoid_clamped(input + field);
  if (input_out != nullptr) *input_out = std::move(input);
  return next;
}

FpiResult solve_fpi(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& field,
                    const FpiOptions& opts, const MagnetizationState& init) {
  opts.validate();
  check_shapes(rbm, init, field.size());
  const Matrix W_sq =
      opts.method == Factorization::Tap ? Matrix(rbm.W.array().square()) : Matrix();
  const double keep = 1.0 - opts.damping;

  FpiResult out;
  out.state = init;
  Vector& m_v = out.state.m_v;
  Vector& m_h = out.state.m_h;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector h_new = hidden_update_with(rbm, W_sq, m_v, opts.method, m_h);
    m_h = (keep * m_h + opts.damping * h_new).unaryExpr([](double m) { return clamp_mean(m); });

    out.visible_input = visible_input_with(rbm, W_sq, m_h, opts.method, m_v);
    const Vector v_new = sigmoid_clamped(out.visible_input + field);
    const Vector v_next =
        (keep * m_v + opts.damping * v_new).unaryExpr([](double m) { return clamp_mean(m); });
    const double change = (v_next - m_v).cwiseAbs().maxCoeff();
    m_v = v_next;
    out.iters = it;
    if (change < opts.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

ExactMarginals exact_enumeration(const BinaryRbm& rbm, const Eigen::Ref<const Vector>& field) {
  rbm.validate();
  check_length(field.size(), rbm.n_visible(), "visible field");
  const int nv = static_cast<int>(rbm.n_visible());
  const int nh = static_cast<int>(rbm.n_hidden());
  if (nv + nh > kMaxEnumerationUnits) {
    throw ValidationError(fmt::format("exact enumeration: n_v + n_h = {} exceeds the bound {}",
                                      nv + nh, kMaxEnumerationUnits));
  }

  // Streaming log-sum-exp: every accumulator is scaled by exp(-ref).
  double ref = -std::numeric_limits<double>::infinity();
  double z = 0.0;
  std::vector<double> sv(nv, 0.0), sh(nh, 0.0);
  std::vector<double> hidden_in(nh);

  const std::uint64_t v_states = std::uint64_t{1} << nv;
  const std::uint64_t h_states = std::uint64_t{1} << nh;
  for (std::uint64_t vs = 0; vs < v_states; ++vs) {
    double vis = 0.0;
    for (int j = 0; j < nh; ++j) hidden_in[j] = rbm.hbias[j];
    for (int i = 0; i < nv; ++i) {
      if ((vs >> i) & 1U) {
        vis += rbm.vbias[i] + field[i];
        for (int j = 0; j < nh; ++j) hidden_in[j] += rbm.W(i, j);
      }
    }
    for (std::uint64_t hs = 0; hs < h_states; ++hs) {
      double lw = vis;
      for (int j = 0; j < nh; ++j) {
        if ((hs >> j) & 1U) lw += hidden_in[j];
      }
      if (lw > ref) {
        const double scale = std::exp(ref - lw);
        z *= scale;
        for (double& s : sv) s *= scale;
        for (double& s : sh) s *= scale;
        ref = lw;
      }
      const double w = std::exp(lw - ref);
      z += w;
      for (int i = 0; i < nv; ++i) {
        if ((vs >> i) & 1U) sv[i] += w;
      }
      for (int j = 0; j < nh; ++j) {
        if ((hs >> j) & 1U) sh[j] += w;
      }
    }
  }

  ExactMarginals out;
  out.pv.resize(nv);
  out.ph.resize(nh);
  for (int i = 0; i < nv; ++i) out.pv[i] = sv[i] / z;
  for (int j = 0; j < nh; ++j) out.ph[j] = sh[j] / z;
  out.ln_z = ref + std::log(z);
  return out;
}

double exact_log_likelihood(const BinaryRbm& rbm, const Matrix& data) {
  check_length(data.cols(), rbm.n_visible(), "data columns");
  const double ln_z = exact_enumeration(rbm, Vector::Zero(rbm.n_visible())).ln_z;
  double total = 0.0;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const Vector v = data.row(r).transpose();
    const Vector hidden_in = rbm.hbias + rbm.W.transpose() * v;
    double lp = rbm.vbias.dot(v) - ln_z;
    // ln(1 + e^x), summed out analytically over each hidden unit
    for (Eigen::Index j = 0; j < hidden_in.size(); ++j) {
      lp += log_add_exp(0.0, hidden_in[j]);
    }
    total += lp;
  }
  return total / static_cast<double>(data.rows());
}

BinaryRbm cd1_epoch(const BinaryRbm& rbm, const Matrix& data, double learning_rate,
                    double weight_decay, int batch_size, Rng& rng) {
  rbm.validate();
  check_length(data.cols(), rbm.n_visible(), "data columns");
  if (batch_size < 1) throw ValidationError("CD-1: batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw ValidationError("CD-1: learning rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ValidationError("CD-1: weight decay must be >= 0");
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const double x = data(r, c);
      if (x != 0.0 && x != 1.0) {
        throw ValidationError(
            fmt::format("CD-1: data entry ({}, {}) = {} is not binary", r, c, x));
      }
    }
  }

  BinaryRbm out = rbm;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Eigen::Index n = data.rows();
  for (Eigen::Index start = 0; start < n; start += batch_size) {
    const Eigen::Index b = std::min<Eigen::Index>(batch_size, n - start);
    Matrix v0(b, data.cols());
    for (Eigen::Index r = 0; r < b; ++r) v0.row(r) = data.row(order[start + r]);

    const Matrix ph0 = sigmoid_rows((v0 * out.W).rowwise() + out.hbias.transpose());
    Matrix h0(b, ph0.cols());
    for (Eigen::Index r = 0; r < b; ++r) {
      for (Eigen::Index j = 0; j < ph0.cols(); ++j) h0(r, j) = unif(rng) < ph0(r, j) ? 1.0 : 0.0;
    }
    const Matrix pv1 = sigmoid_rows((h0 * out.W.transpose()).rowwise() + out.vbias.transpose());
    const Matrix ph1 = sigmoid_rows((pv1 * out.W).rowwise() + out.hbias.transpose());

    const double inv_b = 1.0 / static_cast<double>(b);
    const Matrix grad_W =
        (v0.transpose() * ph0 - pv1.transpose() * ph1) * inv_b - weight_decay * out.W;
    const Vector grad_v = (v0 - pv1).colwise().sum().transpose() * inv_b;
    const Vector grad_h = (ph0 - ph1).colwise().sum().transpose() * inv_b;
    out.W += learning_rate * grad_W;
    out.vbias += learning_rate * grad_v;
    out.hbias += learning_rate * grad_h;
  }
  return out;
}

void TrainSpec::validate() const {
  if (n_hidden < 1) throw ValidationError("training: n_hidden must be >= 1");
  if (epochs < 0) throw ValidationError("training: epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ValidationError("training: learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ValidationError("training: weight_decay must be >= 0");
  if (batch_size < 1) throw ValidationError("training: batch_size must be >= 1");
}

BinaryRbm train_rbm(const TrainSpec& spec, const Matrix& data, const EpochCallback& on_epoch) {
  spec.validate();
  if (data.rows() < 1 || data.cols() < 1) throw ValidationError("training: empty data set");

  BinaryRbm rbm = BinaryRbm::zeros(data.cols(), spec.n_hidden);
  Rng init_rng = make_rng(spec.seed, "train/init");
  std::normal_distribution<double> normal(0.0, 0.01);
  for (Eigen::Index i = 0; i < rbm.W.rows(); ++i) {
    for (Eigen::Index j = 0; j < rbm.W.cols(); ++j) rbm.W(i, j) = normal(init_rng);
  }

  Rng rng = make_rng(spec.seed, "train/epochs");
  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    rbm = cd1_epoch(rbm, data, spec.learning_rate, spec.weight_decay, spec.batch_size, rng);
    if (on_epoch) on_epoch(epoch, rbm);
  }
  return rbm;
}

double reconstruction_error(const BinaryRbm& rbm, const Matrix& data) {
  check_length(data.cols(), rbm.n_visible(), "data columns");
  if (data.rows() == 0) return 0.0;
  const Matrix ph = sigmoid_rows((data * rbm.W).rowwise() + rbm.hbias.transpose());
  const Matrix pv = sigmoid_rows((ph * rbm.W.transpose()).rowwise() + rbm.vbias.transpose());
  return (data - pv).squaredNorm() / static_cast<double>(data.size());
}

}  // namespace rbmamp
