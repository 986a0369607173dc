#pragma once

// MNIST-style image ingestion (IDX3 containers, optionally gzip-compressed),
// support binarization, empirical sparsity statistics and synthetic
// Gauss-Bernoulli signals.

#include "rbmamp/numeric.hpp"
#include "rbmamp/random.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace rbmamp {

struct ImageSet {
  Matrix images;  // one image per row, pixels in [0, 1]
  int rows = 0;
  int cols = 0;

  Eigen::Index count() const noexcept { return images.rows(); }
  Eigen::Index pixels() const noexcept { return images.cols(); }

  /// First `n` images (all of them if n exceeds count()).
  ImageSet head(Eigen::Index n) const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// Parses an uncompressed IDX3 unsigned-byte image file. Pixels are scaled by 1/255.
/// Throws IoError naming the byte offset on a wrong magic or truncated payload.
ImageSet parse_idx(std::span<const std::byte> bytes);

/// Inverse of parse_idx: pixels are written as round(255 x).
std::vector<std::byte> serialize_idx(const ImageSet& set);

/// Inflates gzip input (detected by the 1f 8b magic); other input passes through.
std::vector<std::byte> maybe_gunzip(std::vector<std::byte> bytes);

ImageSet read_idx_file(const std::filesystem::path& path);

/// 1 where pixel > threshold, else 0.
Matrix binarize(const Matrix& images, double threshold = 0.0);

/// Column means of a binary matrix: per-pixel probability of being non-zero.
Vector empirical_support_rates(const Matrix& binary);

/// Fraction of non-zero entries of one signal.
double sparsity(const Eigen::Ref<const Vector>& x);

struct GbParams {
  double mu = 0.0;
  double sigma2 = 1.0;
};

inline constexpr double kSigma2Floor = 1e-4;

/// Mean and (population) variance of all non-zero pixels, variance floored at 1e-4.
GbParams fit_gb_params(const Matrix& images, double sigma2_floor = kSigma2Floor);

/// Each coordinate is 0 with probability 1 - rho, else N(mu, sigma2).
Vector synth_gb_signal(Eigen::Index n, double rho, double mu, double sigma2, Rng& rng);

}  // namespace rbmamp
