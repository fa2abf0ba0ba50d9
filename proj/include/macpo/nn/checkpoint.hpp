#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace macpo::nn {

struct CheckpointBlock {
  std::string name;
  std::vector<std::vector<int>> layer_sizes;  // one entry per Mlp in the block
  std::vector<double> values;

  friend bool operator==(const CheckpointBlock&, const CheckpointBlock&) = default;
};

/// After the 16-byte header: config text, run counters, then each block as
/// name, layer-size manifest, value count and raw little-endian doubles.
struct Checkpoint {
  std::string config_text;
  std::uint64_t episodes = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t train_steps = 0;
  std::vector<CheckpointBlock> blocks;

  const CheckpointBlock& block(const std::string& name) const;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws std::runtime_error if the file is missing or malformed.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace macpo::nn
