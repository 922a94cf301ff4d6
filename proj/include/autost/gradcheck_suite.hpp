#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace autost {

struct SuiteEntry {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t points = 0;
  std::size_t entries = 0;
};

/// Finite-difference checks of every trainable operation (attention,
/// encoder, VGAE encode, reconstruction, InfoNCE, InfoBN, the overall loss),
/// each at `points` random parameter draws. Deterministic in `seed`.
std::vector<SuiteEntry> run_gradcheck_suite(std::size_t points = 20, std::uint64_t seed = 0);

}  // namespace autost
