// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "masa/resample.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace masa;

TEST_CASE("catmull-rom weights interpolate and sum to one") {
  double w[4];
  detail::catmull_rom_weights(0.0, w);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 0.0);
  CHECK(w[3] == 0.0);
  for (double t : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    detail::catmull_rom_weights(t, w);
    CHECK_THAT(w[0] + w[1] + w[2] + w[3], Catch::Matchers::WithinAbs(1.0, 1e-12));
    // Same four taps as the piecewise form.
    CHECK_THAT(w[0], Catch::Matchers::WithinAbs(oracle::cubic_weight(t + 1.0), 1e-12));
    CHECK_THAT(w[1], Catch::Matchers::WithinAbs(oracle::cubic_weight(t), 1e-12));
    CHECK_THAT(w[2], Catch::Matchers::WithinAbs(oracle::cubic_weight(1.0 - t), 1e-12));
    CHECK_THAT(w[3], Catch::Matchers::WithinAbs(oracle::cubic_weight(2.0 - t), 1e-12));
  }
}

TEST_CASE("bicubic resize preserves constant images") {
  const Image img(16, 16, 0.375f);
  for (auto [oh, ow] : {std::pair{4, 4}, {16, 16}, {23, 9}, {64, 64}}) {
    const Image out = bicubic_resize_to(img, oh, ow);
    for (float v : out.data) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.375, 1e-6));
  }
}

TEST_CASE("bicubic resize at factor one is the identity") {
  std::mt19937 gen(21);
  const Image img = synth::random_image(13, 17, gen);
  const Image out = bicubic_resize(img, Fraction{1, 1});
  REQUIRE(out.same_shape(img));
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK_THAT(out.data[i], Catch::Matchers::WithinAbs(img.data[i], 1e-6));
}

TEST_CASE("separable bicubic matches the direct per-pixel kernel sum") {
  std::mt19937 gen(22);
  for (auto [h, w, oh, ow] : {std::tuple{8, 8, 4, 4},
                              {32, 32, 8, 8},
                              {12, 20, 31, 7},
                              {25, 13, 50, 26},
                              {16, 16, 16, 16}}) {
    const Image img = synth::random_image(h, w, gen);
    const Image fast = bicubic_resize_to(img, oh, ow);
    const Image ref = oracle::bicubic(img, oh, ow);
    REQUIRE(fast.same_shape(ref));
    for (std::size_t i = 0; i < fast.data.size(); ++i)
      CHECK_THAT(static_cast<double>(fast.data[i]),
                 Catch::Matchers::WithinAbs(static_cast<double>(ref.data[i]), 1e-6));
  }
}

TEST_CASE("quarter downsample then geometry round trip keeps sizes exact") {
  const Image img(512, 512, 0.5f);
  const Image down = bicubic_resize(img, Fraction{1, 4});
  CHECK(down.height == 128);
  CHECK(down.width == 128);
  CHECK_THROWS_AS(bicubic_resize(Image(2, 2), Fraction{1, 4}), InvariantError);
}

TEST_CASE("bilinear feature resize is exact on constants and midpoints") {
  FeatureMap f(2, 2, 2);
  f.at(0, 0, 0) = 0.0f;
  f.at(0, 0, 1) = 1.0f;
  f.at(0, 1, 0) = 2.0f;
  f.at(0, 1, 1) = 3.0f;
  for (auto& v : f.values) v += 0.0f;
  for (int i = 0; i < 4; ++i) f.plane(1)[i] = 0.25f;

  const FeatureMap up = bilinear_resize(f, 4, 4);
  REQUIRE(up.height == 4);
  REQUIRE(up.width == 4);
  // Plane 1 is constant, so every upsampled value matches it.
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK_THAT(up.at(1, y, x), Catch::Matchers::WithinAbs(0.25, 1e-7));
  // Corners replicate the source corners (align-centers, edge clamp).
  CHECK(up.at(0, 0, 0) == 0.0f);
  CHECK(up.at(0, 3, 3) == 3.0f);
  // Interior samples interpolate the two neighbours with weight 3/4 - 1/4.
  CHECK_THAT(up.at(0, 0, 1), Catch::Matchers::WithinAbs(0.25, 1e-7));
  CHECK_THAT(up.at(0, 0, 2), Catch::Matchers::WithinAbs(0.75, 1e-7));
}

TEST_CASE("bilinear downsample of a linear ramp stays linear") {
  FeatureMap f(1, 1, 9);
  for (int x = 0; x < 9; ++x) f.at(0, 0, x) = static_cast<float>(x);
  const FeatureMap down = bilinear_resize(f, 1, 3);
  // Sample centers land at x = 1, 4, 7 on the source axis.
  CHECK_THAT(down.at(0, 0, 0), Catch::Matchers::WithinAbs(1.0, 1e-6));
  CHECK_THAT(down.at(0, 0, 1), Catch::Matchers::WithinAbs(4.0, 1e-6));
  CHECK_THAT(down.at(0, 0, 2), Catch::Matchers::WithinAbs(7.0, 1e-6));
}
