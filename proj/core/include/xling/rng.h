// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace xling {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a label, so that a
// decision keyed by (seed, label) does not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

// Portable RNG: std::mt19937_64 has a fully specified output sequence, while
// the standard distributions do not. All bounded draws go through below().
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform real in [0, 1) with 53 bits of precision.
  double unit();

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xling
