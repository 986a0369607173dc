#include "rbmamp/rbm_io.hpp"

#include "rbmamp/error.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rbmamp {
namespace {

constexpr char kMagic[4] = {'R', 'B', 'M', '1'};
constexpr std::size_t kHeaderSize = 12;

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::byte>((v >> (8 * k)) & 0xFFU));
}

void put_f64(std::vector<std::byte>& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::byte>((bits >> (8 * k)) & 0xFFU));
}

class Reader {
 public:
  Reader(std::span<const std::byte> bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  std::uint64_t take(int width) {
    if (pos_ + static_cast<std::size_t>(width) > bytes_.size()) {
      throw IoError(fmt::format("unexpected end of file at offset {}", bytes_.size()),
                    bytes_.size());
    }
    std::uint64_t v = 0;
    for (int k = 0; k < width; ++k) {
      v |= static_cast<std::uint64_t>(std::to_integer<unsigned>(bytes_[pos_ + k])) << (8 * k);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  double f64() { return std::bit_cast<double>(take(8)); }
  std::size_t pos() const noexcept { return pos_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_;
};

}  // namespace

std::vector<std::byte> serialize_rbm(const BinaryRbm& rbm) {
  rbm.validate();
  std::vector<std::byte> out;
  const auto nv = static_cast<std::size_t>(rbm.n_visible());
  const auto nh = static_cast<std::size_t>(rbm.n_hidden());
  out.reserve(kHeaderSize + 8 * (nv + nh + nv * nh));
  for (char ch : kMagic) out.push_back(static_cast<std::byte>(ch));
  put_u32(out, static_cast<std::uint32_t>(nv));
  put_u32(out, static_cast<std::uint32_t>(nh));
  for (std::size_t i = 0; i < nv; ++i) put_f64(out, rbm.vbias[i]);
  for (std::size_t j = 0; j < nh; ++j) put_f64(out, rbm.hbias[j]);
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = 0; j < nh; ++j) put_f64(out, rbm.W(i, j));
  }
  return out;
}

BinaryRbm parse_rbm(std::span<const std::byte> bytes) {
  if (bytes.size() < 4) {
    throw IoError(fmt::format("unexpected end of file at offset {}", bytes.size()), bytes.size());
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("not an RBM1 file", 0);

  Reader in(bytes, 4);
  const auto nv = static_cast<Eigen::Index>(in.take(4));
  const auto nh = static_cast<Eigen::Index>(in.take(4));
  if (nv < 1 || nh < 1) throw IoError("RBM1 header declares an empty layer", 4);
  const std::size_t expected =
      kHeaderSize + 8 * static_cast<std::size_t>(nv + nh + nv * nh);
  if (bytes.size() < expected) {
    throw IoError(fmt::format("unexpected end of file at offset {} (expected {} bytes)",
                              bytes.size(), expected),
                  bytes.size());
  }
  if (bytes.size() > expected) {
    throw IoError(fmt::format("trailing bytes after offset {}", expected), expected);
  }

  BinaryRbm rbm = BinaryRbm::zeros(nv, nh);
  for (Eigen::Index i = 0; i < nv; ++i) rbm.vbias[i] = in.f64();
  for (Eigen::Index j = 0; j < nh; ++j) rbm.hbias[j] = in.f64();
  for (Eigen::Index i = 0; i < nv; ++i) {
    for (Eigen::Index j = 0; j < nh; ++j) rbm.W(i, j) = in.f64();
  }
  if (!rbm.vbias.allFinite() || !rbm.hbias.allFinite() || !rbm.W.allFinite()) {
    throw IoError("RBM1 file contains non-finite parameters", kHeaderSize);
  }
  return rbm;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {}", path.string()));
  std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError(fmt::format("write to {} failed", path.string()));
}

void write_rbm_file(const std::filesystem::path& path, const BinaryRbm& rbm) {
  write_file_bytes(path, serialize_rbm(rbm));
}

BinaryRbm read_rbm_file(const std::filesystem::path& path) {
  return parse_rbm(read_file_bytes(path));
}

}  // namespace rbmamp
