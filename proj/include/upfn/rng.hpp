#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace upfn {

// Philox 4x32-10 block cipher: a pure function of (key, counter). Every
// lattice cell of every replicate is addressed directly, so serial and
// parallel execution produce bit-identical streams.
namespace philox {

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

inline std::array<std::uint32_t, 4> block_at(std::uint64_t seed, std::uint64_t stream,
                                             std::uint64_t index) {
  return block({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
               {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

}  // namespace philox

inline double to_unit_interval(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Two U[0,1) draws addressed by (seed, stream, index).
inline std::pair<double, double> uniform_pair(std::uint64_t seed, std::uint64_t stream,
                                              std::uint64_t index) {
  const auto w = philox::block_at(seed, stream, index);
  const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
  return {to_unit_interval(a), to_unit_interval(b)};
}

inline double uniform_variate(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return uniform_pair(seed, stream, index).first;
}

// Standard normal addressed by (seed, stream, index) via Box-Muller.
inline double normal_variate(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const auto [u1, u2] = uniform_pair(seed, stream, index);
  const double r = std::sqrt(-2.0 * std::log1p(-u1));  // 1-u1 in (0,1]
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace upfn
