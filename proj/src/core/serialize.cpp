#include "macpo/serialize.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace macpo {

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void BinaryWriter::header(const std::array<char, 8>& magic, std::uint32_t version) {
  out_.write(magic.data(), 8);
  u32(version);
  u32(0);
}
void BinaryWriter::u8(std::uint8_t v) { put(out_, v); }
void BinaryWriter::u32(std::uint32_t v) { put(out_, v); }
void BinaryWriter::i32(std::int32_t v) { put(out_, v); }
void BinaryWriter::u64(std::uint64_t v) { put(out_, v); }
void BinaryWriter::f64(double v) { put(out_, std::bit_cast<std::uint64_t>(v)); }
void BinaryWriter::f64s(std::span<const double> v) {
  for (double x : v) f64(x);
}
void BinaryWriter::bytes(std::span<const std::uint8_t> v) {
  out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
}
void BinaryWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryReader::raw(void* dst, std::size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw std::runtime_error("binary stream truncated");
}

std::uint32_t BinaryReader::header(const std::array<char, 8>& magic) {
  std::array<char, 8> got{};
  raw(got.data(), 8);
  if (got != magic) throw std::runtime_error("bad magic: not a " + std::string(magic.data(), 8) + " file");
  const std::uint32_t version = u32();
  if (version != kFormatVersion) throw std::runtime_error("unsupported format version " + std::to_string(version));
  u32();
  return version;
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v;
  raw(&v, 1);
  return v;
}
std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  raw(&v, 4);
  return to_little(v);
}
std::int32_t BinaryReader::i32() {
  std::int32_t v;
  raw(&v, 4);
  return to_little(v);
}
std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  raw(&v, 8);
  return to_little(v);
}
double BinaryReader::f64() { return std::bit_cast<double>(u64()); }
void BinaryReader::f64s(std::span<double> out) {
  for (double& x : out) x = f64();
}
void BinaryReader::bytes(std::span<std::uint8_t> out) { raw(out.data(), out.size()); }
std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

void write_episode(std::ostream& out, const Episode& ep) {
  BinaryWriter w(out);
  w.header(kEpisodeMagic, kFormatVersion);
  const auto& s = ep.shape();
  w.i32(s.n_agents);
  w.i32(s.n_actions);
  w.i32(s.obs_dim);
  w.i32(s.state_dim);
  w.i32(s.episode_limit);
  w.i32(ep.length());
  w.f64s(ep.states_raw());
  w.f64s(ep.obs_raw());
  w.bytes(ep.avail_raw());
  for (int a : ep.actions_raw()) w.i32(a);
  w.f64s(ep.rewards_raw());
  w.bytes(ep.terminated_raw());
}

Episode read_episode(std::istream& in) {
  BinaryReader r(in);
  r.header(kEpisodeMagic);
  EpisodeShape s;
  s.n_agents = r.i32();
  s.n_actions = r.i32();
  s.obs_dim = r.i32();
  s.state_dim = r.i32();
  s.episode_limit = r.i32();
  const int length = r.i32();
  if (s.n_agents <= 0 || s.n_actions <= 0 || s.obs_dim < 0 || s.state_dim < 0 || length <= 0 ||
      length > s.episode_limit || s.episode_limit > (1 << 24))
    throw std::runtime_error("episode header holds an invalid shape");
  const auto L = static_cast<std::size_t>(length);
  const auto n = static_cast<std::size_t>(s.n_agents);
  std::vector<double> states(L * static_cast<std::size_t>(s.state_dim));
  std::vector<double> obs(L * n * static_cast<std::size_t>(s.obs_dim));
  std::vector<std::uint8_t> avail(L * n * static_cast<std::size_t>(s.n_actions));
  std::vector<int> actions(L * n);
  std::vector<double> rewards(L);
  std::vector<std::uint8_t> term(L);
  r.f64s(states);
  r.f64s(obs);
  r.bytes(avail);
  for (int& a : actions) a = r.i32();
  r.f64s(rewards);
  r.bytes(term);
  return Episode::from_raw(s, length, std::move(states), std::move(obs), std::move(avail), std::move(actions),
                           std::move(rewards), std::move(term));
}

std::vector<std::uint8_t> encode_episode(const Episode& ep) {
  std::ostringstream out(std::ios::binary);
  write_episode(out, ep);
  const std::string s = out.str();
  return {s.begin(), s.end()};
}

Episode decode_episode(std::span<const std::uint8_t> bytes) {
  std::istringstream in(std::string(bytes.begin(), bytes.end()), std::ios::binary);
  return read_episode(in);
}

void write_transitions_csv(std::ostream& out, const Episode& ep) {
  const auto& s = ep.shape();
  out << "t,filled,reward,terminated";
  for (int a = 0; a < s.n_agents; ++a) out << ",u" << a;
  for (int d = 0; d < s.state_dim; ++d) out << ",s" << d;
  out << "\n";
  for (int t = 0; t < ep.padded_length(); ++t) {
    const Transition tr = ep.step(t);
    out << t << "," << (tr.filled ? 1 : 0) << "," << tr.reward << "," << (tr.terminated ? 1 : 0);
    for (int u : tr.action.actions) out << "," << u;
    for (double x : tr.state) out << "," << x;
    out << "\n";
  }
}

}  // namespace macpo
