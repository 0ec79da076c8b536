#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "poolsim/rng.hpp"

using poolsim::RngStream;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto out = poolsim::detail::philox4x32_10({0, 0, 0, 0}, {0, 0});
  const std::array<std::uint32_t, 4> want{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u};
  EXPECT_EQ(out, want);
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = poolsim::detail::philox4x32_10(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  const std::array<std::uint32_t, 4> want{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu};
  EXPECT_EQ(out, want);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = poolsim::detail::philox4x32_10(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  const std::array<std::uint32_t, 4> want{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u};
  EXPECT_EQ(out, want);
}

TEST(RngStream, SameCoordinatesReproduce) {
  RngStream a(42, 3, 1, 7), b(42, 3, 1, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, DistinctCoordinatesDiverge) {
  std::set<std::uint64_t> firsts;
  for (std::uint32_t round = 0; round < 4; ++round)
    for (std::uint32_t slot = 0; slot < 4; ++slot)
      for (std::uint32_t rep = 0; rep < 4; ++rep) firsts.insert(RngStream(9, round, slot, rep)());
  firsts.insert(RngStream(10, 0, 0, 0)());
  EXPECT_EQ(firsts.size(), 65u);
}

TEST(RngStream, UniformOpenIntervalAndMoments) {
  RngStream rng(1, 0, 0, 0);
  const int n = 1'000'000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sq / n - mean * mean, 1.0 / 12, 1e-3);
}

TEST(RngStream, NormalMoments) {
  RngStream rng(2, 0, 0, 0);
  const int n = 1'000'000;
  double sum = 0, sq = 0, quad = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
    quad += z * z * z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(quad / n, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(DeriveSeed, SpreadsNeighbouringInputs) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 100; ++a)
    for (std::uint64_t b = 0; b < 10; ++b) seen.insert(poolsim::derive_seed(5, a, b));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(poolsim::derive_seed(5, 1, 0), poolsim::derive_seed(6, 1, 0));
}
