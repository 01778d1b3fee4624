#include "qntk/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace qntk {
namespace {

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32_10).
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(RandomStream, SameAddressSameStream) {
  RandomStream a(42, 3, StreamRole::kEnvironment), b(42, 3, StreamRole::kEnvironment);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u32(), b.next_u32());
}

TEST(RandomStream, RolesAndTrialsAreDistinct) {
  RandomStream env(42, 3, StreamRole::kEnvironment), pol(42, 3, StreamRole::kPolicy), other(42, 4, StreamRole::kEnvironment);
  int same_role = 0, same_trial = 0;
  for (int i = 0; i < 64; ++i) {
    const auto e = env.next_u32();
    same_role += e == pol.next_u32();
    same_trial += e == other.next_u32();
  }
  EXPECT_LT(same_role, 2);
  EXPECT_LT(same_trial, 2);
}

TEST(RandomStream, UniformAndNormalMoments) {
  RandomStream rng(7, 0, StreamRole::kProbe);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(RandomStream, BelowStaysInRange) {
  RandomStream rng(1, 0, StreamRole::kPolicy);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(5), 5u);
}

}  // namespace
}  // namespace qntk
