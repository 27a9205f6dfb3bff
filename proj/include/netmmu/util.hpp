/*
 * Copyright 2026 The netmmu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NETMMU_UTIL_HPP_
#define NETMMU_UTIL_HPP_

#include <bit>
#include <cassert>
#include <cstdint>
#include <random>

namespace netmmu {

inline constexpr bool is_pow2(std::uint64_t x) {
  return x != 0 && std::has_single_bit(x);
}

inline constexpr std::uint64_t align_down(std::uint64_t x, std::uint64_t a) {
  assert(is_pow2(a));
  return x & ~(a - 1);
}

inline constexpr std::uint64_t align_up(std::uint64_t x, std::uint64_t a) {
  assert(is_pow2(a));
  return (x + a - 1) & ~(a - 1);
}

// Largest power of two that divides x; the alignment a block placed at x can use.
// x == 0 divides everything, so report a value larger than any address span.
inline constexpr std::uint64_t alignment_of(std::uint64_t x) {
  return x == 0 ? (std::uint64_t{1} << 63) : (x & (~x + 1));
}

inline constexpr std::uint64_t floor_pow2(std::uint64_t x) { return std::bit_floor(x); }
inline constexpr std::uint64_t ceil_pow2(std::uint64_t x) { return std::bit_ceil(x); }

inline constexpr unsigned log2_exact(std::uint64_t x) {
  assert(is_pow2(x));
  return static_cast<unsigned>(std::bit_width(x) - 1);
}

// splitmix64: stateless mixer used to derive independent RNG streams from one
// user-facing seed without correlated low bits.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic RNG. mt19937_64 output is bit-specified by the standard; the
// uniform mappings below are hand-rolled because std::uniform_*_distribution
// is implementation-defined and would break byte-identical reruns across
// toolchains.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed, std::uint64_t stream = 0)
      : eng_(splitmix64(seed ^ splitmix64(stream))) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n). Multiply-shift map; bias is < 2^-53 for n << 2^64 and,
  // more to the point, identical on every platform.
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

 private:
  std::mt19937_64 eng_;
};

// FNV-1a, used for run-state digests in the summary output.
class Fnv1a {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ull;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace netmmu

#endif  // NETMMU_UTIL_HPP_
