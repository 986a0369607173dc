#pragma once

// RBM1 model container, little-endian throughout:
//
//   offset 0   "RBM1"
//   offset 4   u32 n_v
//   offset 8   u32 n_h
//   offset 12  f64[n_v]       visible biases
//              f64[n_h]       hidden biases
//              f64[n_v * n_h] W, row-major (visible index major)

#include "rbmamp/rbm.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rbmamp {

std::vector<std::byte> serialize_rbm(const BinaryRbm& rbm);

/// Throws IoError("not an RBM1 file"), IoError("unexpected end of file at offset N")
/// or IoError for trailing bytes; the offending byte offset is attached.
BinaryRbm parse_rbm(std::span<const std::byte> bytes);

void write_rbm_file(const std::filesystem::path& path, const BinaryRbm& rbm);
BinaryRbm read_rbm_file(const std::filesystem::path& path);

/// Whole-file read; throws IoError when the file cannot be opened.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace rbmamp
