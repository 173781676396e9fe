#pragma once

// Binary policy checkpoints.
//
// Layout, all integers u32 little-endian, all reals IEEE-754 f64 little-endian:
//   "EMOT"  version(=1)  net_count(=3)
//   per net (mean head, raw-std head, critic): layer_count, widths...
//   mean-head params, raw-std-head params, critic params (MlpSpec layout)
//   global std (one per action dimension), phi

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "emot/policy.hpp"

namespace emot::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  GaussianPolicy policy;
  VectorCritic critic;
};

std::vector<std::uint8_t> encode_checkpoint(const GaussianPolicy& policy, const VectorCritic& critic);
/// Throws std::runtime_error on a bad magic, unknown version or truncation.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const GaussianPolicy& policy, const VectorCritic& critic);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace emot::nn
