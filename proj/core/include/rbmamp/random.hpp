#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rbmamp {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a over the bytes of `label`.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Mixes a root seed with a task label into an independent stream seed.
///
/// Every random draw in the toolkit comes from a stream seeded this way, so a
/// single top-level seed reproduces every row of every output file:
///
///     derive_seed(root, "measure/alpha=0.3/image=17/rep=2")
///
/// The result is splitmix64(root ^ splitmix64(hash_label(label))).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label) noexcept;

inline Rng make_rng(std::uint64_t root, std::string_view label) {
  return Rng(derive_seed(root, label));
}

}  // namespace rbmamp
