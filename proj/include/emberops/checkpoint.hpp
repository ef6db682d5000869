#pragma once

#include <filesystem>
#include <string>

#include "emberops/env.hpp"
#include "emberops/policy.hpp"

namespace emberops {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  PolicyNetwork network;
  NormalizationConstants normalization;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Layout, all integers and reals little-endian:
//   "EMBR", u32 version, u32 input_dim, u32 fleet_size,
//   u32 layer count L, L x u32 layer dims (input, hidden, hidden, 24, 1),
//   parameters as f64 in PolicyNetwork order,
//   u32 constant count, normalisation constants as f64.
std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws CheckpointMismatch when the network input, fleet size or
// normalisation constants disagree with the scenario.
void check_compatible(const Checkpoint& checkpoint, const Scenario& scenario);

}  // namespace emberops
