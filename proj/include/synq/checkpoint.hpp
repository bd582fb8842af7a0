#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "synq/approximator.hpp"
#include "synq/dynamics.hpp"

namespace synq {

// Binary layout, all integers and floats little-endian:
//   "SYNQ" | u32 version | str regime | str resolved config | u64 seed |
//   u64 training steps | u32 array count | { str name | u64 n | n x f64 }*
// where str is a u32 byte length followed by the bytes.
inline constexpr char kCheckpointMagic[4] = {'S', 'Y', 'N', 'Q'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RegimeKind regime = RegimeKind::Regular;
  std::string config_text;
  std::uint64_t seed = 0;
  std::uint64_t training_steps = 0;
  std::vector<NamedArray> arrays;

  bool operator==(const Checkpoint&) const = default;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws CheckpointError on bad magic, unsupported version or truncation.
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace synq
