#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "macpo/episode.hpp"

namespace macpo {

/// Every binary file starts with 16 bytes: an 8-byte ASCII magic, a
/// little-endian u32 format version and a u32 reserved field (zero).
constexpr std::array<char, 8> kEpisodeMagic{'M', 'A', 'C', 'P', 'O', 'E', 'P', 'I'};
constexpr std::array<char, 8> kCheckpointMagic{'M', 'A', 'C', 'P', 'O', 'C', 'K', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}
  void header(const std::array<char, 8>& magic, std::uint32_t version);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void i32(std::int32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  void bytes(std::span<const std::uint8_t> v);
  void str(const std::string& s);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}
  /// Reads and checks the 16-byte header; returns the version.
  std::uint32_t header(const std::array<char, 8>& magic);
  std::uint8_t u8();
  std::uint32_t u32();
  std::int32_t i32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);
  void bytes(std::span<std::uint8_t> out);
  std::string str();

 private:
  void raw(void* dst, std::size_t n);
  std::istream& in_;
};

/// Episode layout after the header: shape (5 x i32), length (i32), then
/// states, observations (f64), availability (u8), actions (i32), rewards
/// (f64), terminated flags (u8), all step-major.
void write_episode(std::ostream& out, const Episode& ep);
Episode read_episode(std::istream& in);
std::vector<std::uint8_t> encode_episode(const Episode& ep);
Episode decode_episode(std::span<const std::uint8_t> bytes);

/// One row per step (including padding up to episode_limit):
/// t,filled,reward,terminated,u0..u{n-1},s0..s{d-1}
void write_transitions_csv(std::ostream& out, const Episode& ep);

}  // namespace macpo
