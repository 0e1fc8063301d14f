// Copyright 2026 The xsec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XSEC_RNG_HPP_
#define XSEC_RNG_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace xsec {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw;
// SC'11).  Every draw is a pure function of (key, counter), so any part
// of a stream can be regenerated independently of call order.  That is
// what makes sharded sampling and per-coordinate field draws bit-stable
// across platforms and thread counts.
class Rng {
 public:
  static constexpr std::string_view kName = "philox4x32-10";

  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        hi_{static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)} {}

  // One Philox block: encrypt the 128-bit counter under a 64-bit key.
  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = uint64_t{0xD2511F53u} * ctr[0];
      const uint64_t p1 = uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<uint32_t>(p1),
             static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  // Child generator for an independent, order-insensitive substream.
  Rng derived(uint64_t tag) const {
    Rng child = *this;
    child.hi_[0] ^= static_cast<uint32_t>(mix64(tag));
    child.hi_[1] ^= static_cast<uint32_t>(mix64(tag) >> 32);
    child.ctr_ = 0;
    child.have_ = 0;
    return child;
  }

  uint32_t next_u32() {
    if (have_ == 0) refill();
    return buf_[--have_];
  }

  uint64_t next_u64() {
    const uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform in [0,1) with 53 random bits.
  double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_u01() < p; }

  // Uniform integer in [0, n).  Rejection keeps the draw unbiased.
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    const uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      const uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  // Index draw from an unnormalized weight vector by CDF scan.
  int next_discrete(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    double u = next_u01() * total;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Stateless draw keyed by a lattice coordinate: the same (seed, stream,
  // coordinate) always yields the same value, independent of traversal
  // order.  Coordinates must fit in 32 bits.
  static double field_u01(uint64_t seed, uint64_t stream, int64_t x, int64_t y,
                          int64_t z) {
    const auto c = coord_counter(stream, x, y, z);
    const auto out = block(c, {static_cast<uint32_t>(seed),
                               static_cast<uint32_t>(seed >> 32)});
    const uint64_t v = (uint64_t{out[0]} << 32) | out[1];
    return static_cast<double>(v >> 11) * 0x1.0p-53;
  }

  static uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

 private:
  static std::array<uint32_t, 4> coord_counter(uint64_t stream, int64_t x,
                                               int64_t y, int64_t z) {
    auto lo32 = [](int64_t v) {
      if (v > INT32_MAX || v < INT32_MIN)
        throw std::invalid_argument("field_u01: coordinate exceeds 32 bits");
      return static_cast<uint32_t>(static_cast<uint64_t>(v));
    };
    return {lo32(x), lo32(y), lo32(z),
            static_cast<uint32_t>(mix64(stream) >> 32)};
  }

  void refill() {
    const std::array<uint32_t, 4> c = {static_cast<uint32_t>(ctr_),
                                       static_cast<uint32_t>(ctr_ >> 32),
                                       hi_[0], hi_[1]};
    buf_ = block(c, key_);
    ++ctr_;
    have_ = 4;
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 2> hi_;  // stream-selecting half of the counter
  uint64_t ctr_ = 0;
  std::array<uint32_t, 4> buf_{};
  int have_ = 0;
};

}  // namespace xsec

#endif  // XSEC_RNG_HPP_
