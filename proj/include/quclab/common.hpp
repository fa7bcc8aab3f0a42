#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace quclab {

// Byte strings double as machine ids, message payloads and register contents.
using Bytes = std::string;

// Centralized numeric tolerances.
namespace tol {
inline constexpr double kStateNorm = 1e-12;      // statevector norm after public ops
inline constexpr double kExecNorm = 1e-10;       // pool norm at end of an execution
inline constexpr double kUnitary = 1e-10;        // unitarity check
inline constexpr double kDistSum = 1e-9;         // exhaustive-mode probability mass
inline constexpr double kExactIdentity = 1e-12;  // identities computed in exhaustive mode
}  // namespace tol

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };
struct BadTargets : Error { using Error::Error; };
struct UnknownParty : Error { using Error::Error; };
struct IdCollision : Error { using Error::Error; };
struct BranchCapExceeded : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct AlphabetMismatch : Error { using Error::Error; };

// --- bit strings -----------------------------------------------------------
// Protocol bit strings travel as ASCII '0'/'1' so traces stay readable.

inline bool valid_bits(const Bytes& s) {
  for (char c : s)
    if (c != '0' && c != '1') return false;
  return true;
}

inline Bytes xor_bits(const Bytes& a, const Bytes& b) {
  if (a.size() != b.size()) throw LengthMismatch("xor_bits: length mismatch");
  Bytes r(a.size(), '0');
  for (size_t i = 0; i < a.size(); ++i) r[i] = (a[i] != b[i]) ? '1' : '0';
  return r;
}

// --- length-prefixed tuple codec -------------------------------------------
// tuple := u32le(count) || (u32le(len_i) || bytes_i)*
// The classical register holds encode_tuple({sender, recipient, payload}).

inline void put_u32(Bytes& out, uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 24) & 0xff));
}

inline Bytes encode_tuple(std::span<const Bytes> parts) {
  Bytes out;
  put_u32(out, uint32_t(parts.size()));
  for (const auto& p : parts) {
    put_u32(out, uint32_t(p.size()));
    out += p;
  }
  return out;
}

inline Bytes encode_tuple(std::initializer_list<Bytes> parts) {
  return encode_tuple(std::span<const Bytes>(parts.begin(), parts.size()));
}

inline std::optional<std::vector<Bytes>> decode_tuple(const Bytes& in) {
  size_t pos = 0;
  auto get_u32 = [&](uint32_t& v) -> bool {
    if (pos + 4 > in.size()) return false;
    v = uint32_t(uint8_t(in[pos])) | uint32_t(uint8_t(in[pos + 1])) << 8 |
        uint32_t(uint8_t(in[pos + 2])) << 16 | uint32_t(uint8_t(in[pos + 3])) << 24;
    pos += 4;
    return true;
  };
  uint32_t count = 0;
  if (!get_u32(count)) return std::nullopt;
  if (count > 1u << 20) return std::nullopt;
  std::vector<Bytes> parts;
  parts.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t len = 0;
    if (!get_u32(len)) return std::nullopt;
    if (pos + len > in.size()) return std::nullopt;
    parts.emplace_back(in.substr(pos, len));
    pos += len;
  }
  if (pos != in.size()) return std::nullopt;
  return parts;
}

inline Bytes to_hex(const Bytes& in) {
  static const char* d = "0123456789abcdef";
  Bytes out;
  out.reserve(in.size() * 2);
  for (unsigned char c : in) {
    out.push_back(d[c >> 4]);
    out.push_back(d[c & 0xf]);
  }
  return out;
}

// --- deterministic randomness ----------------------------------------------
// std::uniform_int_distribution is implementation-defined, so sampling is
// hand-rolled on top of mt19937_64 to keep seeded runs portable.

using Rng = std::mt19937_64;

inline uint64_t uniform_below(Rng& rng, uint64_t n) {
  if (n == 0) throw Error("uniform_below: empty range");
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

inline double uniform_unit(Rng& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

inline Bytes random_bit_string(Rng& rng, size_t len) {
  Bytes s(len, '0');
  for (auto& c : s) c = (rng() & 1) ? '1' : '0';
  return s;
}

// Two-sided Hoeffding radius for a proportion estimated from n samples.
inline double hoeffding_radius(size_t n, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * double(n)));
}

}  // namespace quclab
