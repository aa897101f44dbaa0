#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "seisint/config.hpp"
#include "seisint/model.hpp"

namespace seisint {

// File layout (all integers little-endian):
//   "SINT" | u32 version | u64 config length | config JSON text
//   | u32 tensor count | per tensor: u32 name length, name, u32 rank,
//     u64 extents[rank], u64 absolute payload offset
//   | float32 payloads in directory order | u64 FNV-1a checksum of all prior bytes

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingMetadata {
  std::size_t train_events = 0;
  std::size_t test_events = 0;
  std::vector<double> classifier_losses;
  std::vector<double> regressor_losses;

  bool operator==(const TrainingMetadata&) const = default;
};

struct Checkpoint {
  RunConfig config;
  TrainingMetadata metadata;
  ClassifierModel<float> classifier;
  RegressorModel<float> regressor;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);

/// Throws VersionError on an unknown version tag and ChecksumError on
/// truncation or corrupted bytes.
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes to a sibling temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace seisint
