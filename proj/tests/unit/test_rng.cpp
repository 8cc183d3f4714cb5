#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "koopcert/rng.hpp"

using koopcert::RandomStream;

TEST(Philox, KnownAnswerVectors) {
    using Block = std::array<std::uint32_t, 4>;
    EXPECT_EQ(RandomStream::philox_block({0, 0, 0, 0}, {0, 0}),
              (Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(RandomStream::philox_block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu}),
              (Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(RandomStream::philox_block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                         {0xa4093822u, 0x299f31d0u}),
              (Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, EqualSeedsGiveEqualSequences) {
    RandomStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
    RandomStream c(42, 7), d(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(c.normal(), d.normal());
}

TEST(RandomStream, StreamsAndSeedsDiffer) {
    RandomStream a(42, 0), b(42, 1), c(43, 0);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 100; ++i) {
        seen.insert(a());
        seen.insert(b());
        seen.insert(c());
    }
    EXPECT_EQ(seen.size(), 300u);
}

TEST(RandomStream, ChildStreamsAreDeterministicAndDistinct) {
    const RandomStream root(5);
    RandomStream c1 = root.child(3), c2 = root.child(3), c3 = root.child(4);
    EXPECT_EQ(c1.stream_id(), c2.stream_id());
    EXPECT_NE(c1.stream_id(), c3.stream_id());
    EXPECT_EQ(c1(), c2());
}

TEST(RandomStream, UniformAndNormalMoments) {
    RandomStream rng(1);
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
    EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sn / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(sn2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}
