#include "rbmamp/dataset.hpp"
#include "rbmamp/error.hpp"
#include "rbmamp/rbm_io.hpp"

#include <gtest/gtest.h>
#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

using namespace rbmamp;

namespace {

std::vector<std::byte> idx_bytes(std::uint32_t magic, std::uint32_t count, std::uint32_t rows,
                                 std::uint32_t cols, const std::vector<unsigned>& pixels) {
  std::vector<std::byte> out;
  for (std::uint32_t v : {magic, count, rows, cols}) {
    for (int k = 3; k >= 0; --k) out.push_back(static_cast<std::byte>((v >> (8 * k)) & 0xFF));
  }
  for (unsigned p : pixels) out.push_back(static_cast<std::byte>(p));
  return out;
}

std::vector<std::byte> gzip(const std::vector<std::byte>& in) {
  z_stream zs{};
  deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
  std::vector<std::byte> out(deflateBound(&zs, static_cast<uLong>(in.size())) + 32);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<std::byte*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

std::string error_of(const std::vector<std::byte>& bytes) {
  try {
    parse_idx(bytes);
  } catch (const IoError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ParseIdx, MinimalImage) {
  const ImageSet s = parse_idx(idx_bytes(0x803, 1, 1, 1, {255}));
  ASSERT_EQ(s.count(), 1);
  ASSERT_EQ(s.pixels(), 1);
  EXPECT_EQ(s.images(0, 0), 1.0);
}

TEST(ParseIdx, RowMajorLayoutAndScaling) {
  const ImageSet s = parse_idx(idx_bytes(0x803, 2, 2, 3, {0, 51, 102, 153, 204, 255,
                                                          1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(s.rows, 2);
  EXPECT_EQ(s.cols, 3);
  EXPECT_DOUBLE_EQ(s.images(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(s.images(0, 5), 1.0);
  EXPECT_DOUBLE_EQ(s.images(1, 2), 3.0 / 255.0);
}

TEST(ParseIdx, LabelFileHasWrongMagic) {
  const std::string msg = error_of(idx_bytes(0x801, 1, 1, 1, {0}));
  EXPECT_NE(msg.find("wrong magic"), std::string::npos);
  EXPECT_NE(msg.find("offset 0"), std::string::npos);
}

TEST(ParseIdx, TruncationNamesOffset) {
  auto bytes = idx_bytes(0x803, 2, 2, 2, {1, 2, 3, 4, 5, 6, 7});
  const std::string msg = error_of(bytes);
  EXPECT_NE(msg.find("unexpected end of file at offset 23"), std::string::npos) << msg;
  bytes.resize(10);
  try {
    parse_idx(bytes);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.offset(), 10u);
  }
}

TEST(ParseIdx, SerializeRoundTripIsBitExact) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<unsigned> byte(0, 255);
  std::vector<unsigned> px(5 * 28 * 28);
  for (auto& p : px) p = byte(rng);
  const auto bytes = idx_bytes(0x803, 5, 28, 28, px);
  const ImageSet s = parse_idx(bytes);
  EXPECT_EQ(serialize_idx(s), bytes);
  EXPECT_EQ(parse_idx(serialize_idx(s)).images, s.images);
}

TEST(Gzip, TransparentInflate) {
  const auto raw = idx_bytes(0x803, 3, 2, 2, {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110});
  EXPECT_EQ(maybe_gunzip(gzip(raw)), raw);
  EXPECT_EQ(maybe_gunzip(raw), raw);
}

TEST(Gzip, TruncatedStreamIsIoError) {
  std::vector<unsigned> px(4000);
  for (std::size_t k = 0; k < px.size(); ++k) px[k] = static_cast<unsigned>((k * 37) % 256);
  auto z = gzip(idx_bytes(0x803, 10, 20, 20, px));
  z.resize(z.size() / 2);
  EXPECT_THROW(maybe_gunzip(z), IoError);
}

TEST(ReadIdxFile, MissingFileAndGzipFile) {
  const auto dir = std::filesystem::temp_directory_path() / "rbmamp_test_dataset";
  std::filesystem::create_directories(dir);
  EXPECT_THROW(read_idx_file(dir / "missing.idx"), IoError);
  const auto raw = idx_bytes(0x803, 1, 2, 2, {255, 0, 0, 255});
  write_file_bytes(dir / "a.idx.gz", gzip(raw));
  const ImageSet s = read_idx_file(dir / "a.idx.gz");
  EXPECT_EQ(s.images(0, 3), 1.0);
  write_file_bytes(dir / "bad.idx", idx_bytes(0x801, 1, 1, 1, {0}));
  try {
    read_idx_file(dir / "bad.idx");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.idx"), std::string::npos);
  }
}

TEST(Binarize, ThresholdRule) {
  Matrix img(1, 4);
  img << 0.0, 0.003, 0.5, 1.0;
  const Matrix b = binarize(img, 0.0);
  EXPECT_EQ(b(0, 0), 0.0);
  EXPECT_EQ(b(0, 1), 1.0);
  EXPECT_EQ(binarize(img, 1.0), Matrix::Zero(1, 4));
  EXPECT_EQ(binarize(Matrix::Zero(2, 5)), Matrix::Zero(2, 5));
  EXPECT_EQ(empirical_support_rates(binarize(Matrix::Zero(2, 5))), Vector::Zero(5));
}

TEST(Binarize, IdempotentAndMonotone) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix img(30, 50);
  for (Eigen::Index k = 0; k < img.size(); ++k) img.data()[k] = u(rng) < 0.4 ? 0.0 : u(rng);
  for (double t : {0.0, 0.2, 0.7}) {
    const Matrix b = binarize(img, t);
    EXPECT_EQ(binarize(b, t < 1.0 ? 0.0 : t), b);
    const Matrix tighter = binarize(img, t + 0.1);
    EXPECT_TRUE(((tighter.array() <= b.array())).all());
  }
}

TEST(EmpiricalRates, AverageEqualsMeanSparsity) {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution bit(0.25);
  Matrix img(40, 30);
  for (Eigen::Index k = 0; k < img.size(); ++k) img.data()[k] = bit(rng) ? 0.5 : 0.0;
  const Vector rates = empirical_support_rates(binarize(img));
  EXPECT_TRUE((rates.array() >= 0.0).all() && (rates.array() <= 1.0).all());
  double mean_sparsity = 0.0;
  for (Eigen::Index r = 0; r < img.rows(); ++r) mean_sparsity += sparsity(img.row(r).transpose());
  mean_sparsity /= static_cast<double>(img.rows());
  EXPECT_NEAR(rates.mean(), mean_sparsity, 1e-14);
}

TEST(FitGbParams, ConstantPixelsHitFloor) {
  Matrix img = Matrix::Zero(3, 4);
  img(0, 1) = img(2, 3) = 1.0;
  const GbParams p = fit_gb_params(img);
  EXPECT_EQ(p.mu, 1.0);
  EXPECT_EQ(p.sigma2, 1e-4);
}

TEST(FitGbParams, TwoPixels) {
  Matrix img = Matrix::Zero(2, 3);
  img(0, 0) = 0.2;
  img(1, 2) = 0.8;
  const GbParams p = fit_gb_params(img);
  EXPECT_DOUBLE_EQ(p.mu, 0.5);
  EXPECT_DOUBLE_EQ(p.sigma2, 0.09);
}

TEST(FitGbParams, NoSupportIsError) {
  EXPECT_THROW(fit_gb_params(Matrix::Zero(3, 3)), ValidationError);
}

TEST(SynthGbSignal, Trivial) {
  Rng rng(1);
  EXPECT_EQ(synth_gb_signal(100, 0.0, 1.0, 1.0, rng), Vector::Zero(100));
  const Vector x = synth_gb_signal(100, 1.0, 0.7, 1e-12, rng);
  EXPECT_LT((x.array() - 0.7).abs().maxCoeff(), 1e-5);
}

TEST(SynthGbSignal, SupportFractionConcentrates) {
  Rng rng(2);
  const int n = 100000;
  for (double rho : {0.05, 0.3, 0.8}) {
    const Vector x = synth_gb_signal(n, rho, 1.0, 0.5, rng);
    EXPECT_LE(std::abs(sparsity(x) - rho), 3.0 * std::sqrt(rho * (1 - rho) / n));
  }
}

TEST(SynthGbSignal, DeterministicPerSeed) {
  Rng a(9), b(9);
  EXPECT_EQ(synth_gb_signal(50, 0.3, 0.0, 1.0, a), synth_gb_signal(50, 0.3, 0.0, 1.0, b));
}

TEST(ImageSet, HeadClampsToCount) {
  ImageSet s;
  s.rows = 1;
  s.cols = 2;
  s.images = Matrix::Ones(3, 2);
  EXPECT_EQ(s.head(2).count(), 2);
  EXPECT_EQ(s.head(10).count(), 3);
}

TEST(DeskData, ShippedFilesParse) {
  const auto path = std::filesystem::path(RBMAMP_SOURCE_DIR) / "data/desk/t10k-images-idx3-ubyte.gz";
  const ImageSet s = read_idx_file(path);
  EXPECT_EQ(s.rows, 28);
  EXPECT_EQ(s.cols, 28);
  EXPECT_EQ(s.count(), 1000);
  EXPECT_GE(s.images.minCoeff(), 0.0);
  EXPECT_LE(s.images.maxCoeff(), 1.0);
}
