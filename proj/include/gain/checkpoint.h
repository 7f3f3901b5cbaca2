#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gain/optimizer.h"

namespace gain {

// Binary parameter file:
//   magic "GAINCKPT" | u32 version | u64 seed | u64 len, metadata bytes |
//   u64 count | count x (u32 len, name | u32 rank | rank x u64 dim |
//   dims-product x f64 row-major data)
// Integers and doubles are written in host byte order.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t version = kFormatVersion;
  std::uint64_t seed = 0;
  // Free-form text stored alongside the tensors (model config, vocab, ...).
  std::string metadata;
  ParamStore params;
};

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Copies values of `source` into `target`. Throws LoadError listing missing and
// extra names, or any shape mismatch.
void AssignParameters(const ParamStore& source, ParamStore& target);

}  // namespace gain
