#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "couplex/oracle.hpp"
#include "couplex/rng.hpp"
#include "couplex/stats.hpp"

using namespace couplex;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswerZero) {
    const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
    const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Stream, SameCoordinatesGiveSameBits) {
    Stream a(42, 7, 3);
    Stream b(42, 7, 3);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a(), b());
    }
}

TEST(Stream, DistinctPathsSubstreamsAndSeedsDiffer) {
    auto first = [](Stream s) { return s(); };
    const std::set<std::uint64_t> values{first(Stream(1, 0, 0)), first(Stream(1, 0, 1)), first(Stream(1, 1, 0)),
                                         first(Stream(2, 0, 0)), first(Stream(1, std::uint64_t{1} << 32, 0))};
    EXPECT_EQ(values.size(), 5u);
}

TEST(Stream, RecordsItsCoordinates) {
    const Stream s(0x1234567890abcdefull, 99, 5);
    EXPECT_EQ(s.seed(), 0x1234567890abcdefull);
    EXPECT_EQ(s.substream(), 99u);
    EXPECT_EQ(s.path(), 5u);
}

TEST(Stream, UniformStaysInOpenInterval) {
    Stream s(3, 0);
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 1.0);
}

TEST(Stream, UniformPassesKolmogorovSmirnov) {
    Stream s(11, 2);
    std::vector<double> u(20000);
    for (auto& v : u) {
        v = s.uniform();
    }
    const auto r = stats::ks_one_sample(u, [](double x) { return x; }, 0.001);
    EXPECT_TRUE(r.passed) << r.statistic << " vs " << r.critical;
}

TEST(Stream, NormalPassesKolmogorovSmirnov) {
    Stream s(12, 2);
    std::vector<double> z(20000);
    for (auto& v : z) {
        v = s.normal();
    }
    const auto r = stats::ks_one_sample(z, normal_cdf, 0.001);
    EXPECT_TRUE(r.passed) << r.statistic << " vs " << r.critical;
}

TEST(DeriveSubstream, IsDeterministicAndSpreads) {
    EXPECT_EQ(derive_substream(5, 9), derive_substream(5, 9));
    std::set<std::uint64_t> seen;
    for (std::uint64_t parent = 0; parent < 20; ++parent) {
        for (std::uint64_t child = 0; child < 50; ++child) {
            seen.insert(derive_substream(parent, child));
        }
    }
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(derive_substream(1, 2), derive_substream(2, 1));
}
