#include "macpo/nn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "macpo/serialize.hpp"

namespace macpo::nn {

const CheckpointBlock& Checkpoint::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw std::runtime_error("checkpoint has no block '" + name + "'");
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  BinaryWriter w(out);
  w.header(kCheckpointMagic, kFormatVersion);
  w.str(c.config_text);
  w.u64(c.episodes);
  w.u64(c.env_steps);
  w.u64(c.train_steps);
  w.u32(static_cast<std::uint32_t>(c.blocks.size()));
  for (const auto& b : c.blocks) {
    w.str(b.name);
    w.u32(static_cast<std::uint32_t>(b.layer_sizes.size()));
    for (const auto& sizes : b.layer_sizes) {
      w.u32(static_cast<std::uint32_t>(sizes.size()));
      for (int s : sizes) w.i32(s);
    }
    w.u64(b.values.size());
    w.f64s(b.values);
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  BinaryReader r(in);
  r.header(kCheckpointMagic);
  Checkpoint c;
  c.config_text = r.str();
  c.episodes = r.u64();
  c.env_steps = r.u64();
  c.train_steps = r.u64();
  const std::uint32_t nblocks = r.u32();
  if (nblocks > 64) throw std::runtime_error("checkpoint declares too many blocks");
  for (std::uint32_t k = 0; k < nblocks; ++k) {
    CheckpointBlock b;
    b.name = r.str();
    const std::uint32_t nm = r.u32();
    if (nm > 64) throw std::runtime_error("checkpoint manifest too large");
    for (std::uint32_t i = 0; i < nm; ++i) {
      std::vector<int> sizes(r.u32());
      for (int& s : sizes) s = r.i32();
      b.layer_sizes.push_back(std::move(sizes));
    }
    const std::uint64_t count = r.u64();
    if (count > (1ULL << 32)) throw std::runtime_error("checkpoint block too large");
    b.values.resize(count);
    r.f64s(b.values);
    c.blocks.push_back(std::move(b));
  }
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  write_checkpoint(f, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return read_checkpoint(f);
}

}  // namespace macpo::nn
