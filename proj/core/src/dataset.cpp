#include "rbmamp/dataset.hpp"

#include "rbmamp/error.hpp"
#include "rbmamp/rbm_io.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace rbmamp {
namespace {

std::uint32_t read_be32(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    v = (v << 8) | std::to_integer<std::uint32_t>(bytes[offset + k]);
  }
  return v;
}

void put_be32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int k = 3; k >= 0; --k) out.push_back(static_cast<std::byte>((v >> (8 * k)) & 0xFFU));
}

}  // namespace

ImageSet ImageSet::head(Eigen::Index n) const {
  ImageSet out;
  out.rows = rows;
  out.cols = cols;
  out.images = images.topRows(std::min(n, count()));
  return out;
}

ImageSet parse_idx(std::span<const std::byte> bytes) {
  if (bytes.size() < 16) {
    throw IoError(fmt::format("IDX: truncated header, unexpected end of file at offset {}",
                              bytes.size()),
                  bytes.size());
  }
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImageMagic) {
    throw IoError(fmt::format("IDX: wrong magic 0x{:08x} at offset 0 (expected 0x{:08x})", magic,
                              kIdxImageMagic),
                  0);
  }
  const std::uint32_t count = read_be32(bytes, 4);
  const std::uint32_t rows = read_be32(bytes, 8);
  const std::uint32_t cols = read_be32(bytes, 12);
  const std::uint64_t pixels = std::uint64_t{rows} * cols;
  const std::uint64_t need = 16 + std::uint64_t{count} * pixels;
  if (bytes.size() < need) {
    throw IoError(fmt::format("IDX: truncated payload, unexpected end of file at offset {} "
                              "(header promises {} bytes)",
                              bytes.size(), need),
                  bytes.size());
  }

  ImageSet set;
  set.rows = static_cast<int>(rows);
  set.cols = static_cast<int>(cols);
  set.images.resize(count, static_cast<Eigen::Index>(pixels));
  const std::byte* p = bytes.data() + 16;
  for (std::uint32_t n = 0; n < count; ++n) {
    for (std::uint64_t k = 0; k < pixels; ++k) {
      set.images(n, static_cast<Eigen::Index>(k)) = std::to_integer<unsigned>(*p++) / 255.0;
    }
  }
  return set;
}

std::vector<std::byte> serialize_idx(const ImageSet& set) {
  if (static_cast<Eigen::Index>(set.rows) * set.cols != set.pixels()) {
    throw ValidationError(fmt::format("IDX: {}x{} geometry does not match {} pixels per image",
                                      set.rows, set.cols, set.pixels()));
  }
  std::vector<std::byte> out;
  out.reserve(16 + static_cast<std::size_t>(set.images.size()));
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(set.count()));
  put_be32(out, static_cast<std::uint32_t>(set.rows));
  put_be32(out, static_cast<std::uint32_t>(set.cols));
  for (Eigen::Index n = 0; n < set.count(); ++n) {
    for (Eigen::Index k = 0; k < set.pixels(); ++k) {
      const double v = std::round(std::clamp(set.images(n, k), 0.0, 1.0) * 255.0);
      out.push_back(static_cast<std::byte>(static_cast<unsigned>(v)));
    }
  }
  return out;
}

std::vector<std::byte> maybe_gunzip(std::vector<std::byte> bytes) {
  if (bytes.size() < 2 || bytes[0] != std::byte{0x1f} || bytes[1] != std::byte{0x8b}) {
    return bytes;
  }
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw IoError("gzip: inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());

  std::vector<std::byte> out;
  std::vector<std::byte> chunk(1 << 16);
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(chunk.data());
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      const std::size_t at = zs.total_in;
      inflateEnd(&zs);
      throw IoError(fmt::format("gzip: corrupt or truncated stream at offset {}", at), at);
    }
    out.insert(out.end(), chunk.begin(), chunk.begin() + (chunk.size() - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      const std::size_t at = zs.total_in;
      inflateEnd(&zs);
      throw IoError(fmt::format("gzip: unexpected end of file at offset {}", at), at);
    }
  }
  inflateEnd(&zs);
  return out;
}

ImageSet read_idx_file(const std::filesystem::path& path) {
  try {
    return parse_idx(maybe_gunzip(read_file_bytes(path)));
  } catch (const IoError& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()), e.offset());
  }
}

Matrix binarize(const Matrix& images, double threshold) {
  return (images.array() > threshold).cast<double>().matrix();
}

Vector empirical_support_rates(const Matrix& binary) {
  if (binary.rows() == 0) throw ValidationError("empirical support rates: no samples");
  return binary.colwise().mean().transpose();
}

double sparsity(const Eigen::Ref<const Vector>& x) {
  if (x.size() == 0) return 0.0;
  return static_cast<double>((x.array() != 0.0).count()) / static_cast<double>(x.size());
}

GbParams fit_gb_params(const Matrix& images, double sigma2_floor) {
  double sum = 0.0;
  std::size_t n = 0;
  for (Eigen::Index k = 0; k < images.size(); ++k) {
    const double v = images.data()[k];
    if (v != 0.0) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) throw ValidationError("fit_gb_params: the training set has no non-zero pixels");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index k = 0; k < images.size(); ++k) {
    const double v = images.data()[k];
    if (v != 0.0) ss += (v - mean) * (v - mean);
  }
  return GbParams{mean, std::max(ss / static_cast<double>(n), sigma2_floor)};
}

Vector synth_gb_signal(Eigen::Index n, double rho, double mu, double sigma2, Rng& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw ValidationError(fmt::format("synth_gb_signal: rho = {} outside [0, 1]", rho));
  }
  if (!(sigma2 >= 0.0)) throw ValidationError("synth_gb_signal: sigma2 must be >= 0");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(sigma2);
  Vector x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Both draws happen for every coordinate so the stream layout is independent of rho.
    const double u = unif(rng);
    const double z = normal(rng);
    if (u < rho) x[i] = mu + sd * z;
  }
  return x;
}

}  // namespace rbmamp
