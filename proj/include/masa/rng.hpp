// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace masa {

// Seeded draws go through these helpers instead of std distributions, whose
// output is implementation-defined. mt19937 itself is pinned by the standard,
// so weights and test fixtures reproduce bit-for-bit everywhere.

inline double uniform01(std::mt19937& gen) {
  return gen() * (1.0 / 4294967296.0);  // [0, 1)
}

inline float uniform_in(std::mt19937& gen, float lo, float hi) {
  return static_cast<float>(lo + (hi - lo) * uniform01(gen));
}

}  // namespace masa
