#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbmamp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Means are kept inside [kMeanEps, 1 - kMeanEps] so that x ln x and logit stay finite.
inline constexpr double kMeanEps = 1e-12;

inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// ln p - ln(1 - p); +/-inf at the endpoints.
inline double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

inline double clamp_mean(double m) noexcept { return std::clamp(m, kMeanEps, 1.0 - kMeanEps); }

/// ln(e^a + e^b) without overflow.
inline double log_add_exp(double a, double b) noexcept {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

inline bool all_finite(const Eigen::Ref<const Vector>& v) { return v.allFinite(); }

}  // namespace rbmamp
