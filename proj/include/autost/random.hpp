#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "autost/tensor.hpp"

namespace autost {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a; chain calls by passing the previous result as `h`.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset);
/// FNV-1a over the little-endian bytes of each double.
std::uint64_t fnv1a64(std::span<const double> values, std::uint64_t h = kFnvOffset);

/// Derives an independent stream seed from a master seed, a stream name and
/// an optional counter (e.g. the epoch). Pure function of its arguments.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t counter = 0);

inline Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t counter = 0) {
  return Rng(derive_seed(master, stream, counter));
}

/// Glorot-uniform [rows x cols] matrix.
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);
Tensor gaussian(std::size_t rows, std::size_t cols, double mean, double stddev, Rng& rng);

}  // namespace autost
