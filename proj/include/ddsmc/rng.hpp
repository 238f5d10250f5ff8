// Copyright 2026 The ddsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ddsmc {

/// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
///
/// A stream is identified by a 64-bit key and a 64-bit stream id; the
/// remaining 64 counter bits enumerate blocks within the stream. Two
/// generators built from the same (key, stream) produce the same sequence
/// regardless of which thread constructs them or when.
class Philox4x32 {
public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t key, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_{static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 4) {
      buffer_ = block(Counter{static_cast<std::uint32_t>(block_),
                              static_cast<std::uint32_t>(block_ >> 32), stream_[0],
                              stream_[1]},
                      key_);
      ++block_;
      used_ = 0;
    }
    return buffer_[used_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1).
  double uniform_open() {
    double u = 0.0;
    while (u == 0.0) {
      u = uniform();
    }
    return u;
  }

  /// The raw ten-round bijection.
  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = Counter{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  Key key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t block_ = 0;
  Counter buffer_{};
  int used_ = 4;
};

using Rng = Philox4x32;

/// Domain tags keep streams for different purposes disjoint.
enum class StreamDomain : std::uint32_t {
  particle = 0,
  resample = 1,
  scene = 2,
  training = 3,
  init = 4,
  test = 5,
};

/// Stream for (seed, domain, a, b). `a` and `b` are truncated to 32 and 28
/// bits respectively; the top 4 bits carry the domain.
inline Rng keyed_stream(std::uint64_t seed, StreamDomain domain, std::uint64_t a,
                        std::uint64_t b = 0) {
  const std::uint64_t hi = (static_cast<std::uint64_t>(domain) << 28) | (b & 0x0FFFFFFFu);
  return Rng(seed, (hi << 32) | (a & 0xFFFFFFFFu));
}

/// Stream used by particle `particle` while advancing through step `step`.
inline Rng particle_stream(std::uint64_t seed, std::uint64_t step, std::uint64_t particle) {
  return keyed_stream(seed, StreamDomain::particle, particle, step);
}

} // namespace ddsmc
