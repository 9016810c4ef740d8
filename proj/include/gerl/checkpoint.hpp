#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gerl/model.hpp"

namespace gerl {

// Flat sequence of named arrays, each stored as
//   u32 name length, UTF-8 name, u32 rank, rank × u32 dims, float32 values,
// row-major, all little-endian.
struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ParameterSet<T>& params);
std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path);
// Names and shapes must match the set exactly (ConfigError otherwise).
template <typename T>
void load_checkpoint(const std::filesystem::path& path, ParameterSet<T>& params);

enum class Precision { kFloat32, kFloat64 };
std::string precision_name(Precision p);
Precision parse_precision(const std::string& name);

// JSON sidecar written next to the checkpoint.
struct CheckpointMeta {
  ModelConfig config;
  ModelSizes sizes;
  Precision precision = Precision::kFloat32;
};

void write_checkpoint_meta(const std::filesystem::path& path, const CheckpointMeta& meta);
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path);

}  // namespace gerl
