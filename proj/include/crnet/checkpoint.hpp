#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crnet/models.hpp"
#include "crnet/tensor.hpp"

namespace crnet {

enum class StorageType : std::uint8_t { f64 = 0, f32 = 1 };

struct CheckpointInfo {
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;
    std::uint64_t step = 0;
};

struct Checkpoint {
    Model model;
    CheckpointInfo info;
};

/// Layout (little endian): magic "CRNETCKP", u32 version, u32 model kind, u64 seed, u64 epoch,
/// u64 step, u32 length + model config text, u32 record count, records, u32 CRC-32 of all
/// preceding bytes. A record is u32 name length, name, u8 storage type, 4 x u64 shape, data.
std::vector<std::uint8_t> serialize_checkpoint(const Model& model, const CheckpointInfo& info,
                                               StorageType storage = StorageType::f64);
/// Throws ChecksumError on a bad magic, version or CRC, and ShapeError when the stored tensors
/// do not match the shapes implied by the stored configuration.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const CheckpointInfo& info,
                     StorageType storage = StorageType::f64);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Model architecture as `key = value` lines.
std::string format_model_config(const Model& model);
/// Builds an uninitialised model (empty parameter store) from format_model_config output.
Model parse_model_config(const std::string& text);

/// Single tensor file: magic "CRNETTEN", 4 x u64 shape, f64 data, u32 CRC-32.
void save_tensor(const std::filesystem::path& path, const Tensor4& t);
Tensor4 load_tensor(const std::filesystem::path& path);

}  // namespace crnet
