#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "mil/model/mil_model.hpp"

// Checkpoint container, all integers and floats little-endian:
//
//   magic      8 bytes  "MILCKPT\0"
//   version    u32      1
//   init_seed  u64
//   config     u32 length + UTF-8 JSON of AttentionConfig
//   count      u32      number of tensors
//   per tensor:
//     name     u32 length + bytes
//     rank     u32
//     dims     rank x u64
//     data     product(dims) x f64
//
// Tensors appear in parameter-store order. Loading is bit-exact.
namespace mil {

inline constexpr char kCheckpointMagic[8] = {'M', 'I', 'L', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_checkpoint(const MilModel& model);
MilModel deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const MilModel& model);
MilModel load_checkpoint(const std::filesystem::path& path);

}  // namespace mil
