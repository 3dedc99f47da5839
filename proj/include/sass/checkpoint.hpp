#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sass/autodiff.hpp"

// Checkpoint file, little-endian:
//   "SASSCKPT" | u32 version | str config | u32 epoch
//   | u32 n_params | n x (str name | u32 rank | u32 dims[rank] | f64 values)
//   | str rng_state | u64 opt_step | u32 n_moments | n_moments x (f64 m | f64 v)
//   | u32 CRC32
// where str is a u32 byte length followed by UTF-8 bytes. Moment arrays have
// the length of the matching parameter.
namespace sass {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_text;
  std::uint32_t epoch = 0;
  autodiff::ParamStore params;
  std::string rng_state;
  std::uint64_t opt_step = 0;
  std::vector<std::vector<double>> opt_m;
  std::vector<std::vector<double>> opt_v;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// FormatError on bad magic, truncation or unsupported version;
// IntegrityError on CRC mismatch.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace sass
