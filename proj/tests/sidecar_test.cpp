#include <random>

#include <gtest/gtest.h>

#include "noisegen/sidecar.hpp"

namespace noisegen {
namespace {

ErrorCode decode_error(std::span<const std::uint8_t> bytes) {
    try {
        decode_sidecar(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode succeeded";
    return ErrorCode::Io;
}

TEST(Sidecar, LayoutIsBitExact) {
    const Sidecar s = encode_sidecar({4.0, 0.5, -8.0});
    EXPECT_EQ(s.size(), 11u);
    const Sidecar expected{'N', 'R', 'G', '1', 1, 0xFF, 0xFF, 0x00, 0x80, 0x00, 0x00};
    EXPECT_EQ(s, expected);
}

TEST(Sidecar, RangeEndpoints) {
    const Sidecar lo = encode_sidecar({0.0, 0.0, -8.0});
    for (std::size_t i = 5; i < 11; ++i) EXPECT_EQ(lo[i], 0);
    EXPECT_EQ(decode_sidecar(lo), (NoiseModel{0.0, 0.0, -8.0}));
    EXPECT_EQ(decode_sidecar(encode_sidecar({4.0, 1.0, 8.0})), (NoiseModel{4.0, 1.0, 8.0}));
}

TEST(Sidecar, GridPointsRoundTripExactly) {
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> code(0, 65535);
    for (int trial = 0; trial < 1000; ++trial) {
        const NoiseModel m{4.0 * code(rng) / 65535.0, 1.0 * code(rng) / 65535.0, -8.0 + code(rng) * 16.0 / 65535.0};
        EXPECT_EQ(decode_sidecar(encode_sidecar(m)), m);
    }
}

TEST(Sidecar, RoundTripWithinOneStep) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ua(0, 4), ub(0, 1), ug(-8, 8);
    for (int trial = 0; trial < 10000; ++trial) {
        const NoiseModel m{ua(rng), ub(rng), ug(rng)};
        const NoiseModel d = decode_sidecar(encode_sidecar(m));
        ASSERT_LE(std::abs(d.alpha - m.alpha), 4.0 / 65535);
        ASSERT_LE(std::abs(d.beta - m.beta), 1.0 / 65535);
        ASSERT_LE(std::abs(d.gamma - m.gamma), 16.0 / 65535);
    }
}

TEST(Sidecar, TiesRoundUp) {
    // One code per unit, so 7.5 is an exact tie.
    const QuantRange unit{0.0, 65535.0};
    EXPECT_EQ(quantize(7.5, unit), 8);
    EXPECT_EQ(quantize(7.4999, unit), 7);
}

TEST(Sidecar, NullModelStaysSilent) {
    const NoiseModel d = decode_sidecar(encode_sidecar(NoiseModel::null()));
    EXPECT_EQ(d.alpha, 0.0);
    EXPECT_EQ(d.beta, 0.0);
}

TEST(Sidecar, RejectsOutOfBoxModel) {
    EXPECT_THROW(encode_sidecar({4.5, 0.0, 0.0}), Error);
    EXPECT_THROW(encode_sidecar({0.0, -0.1, 0.0}), Error);
    EXPECT_THROW(encode_sidecar({0.0, 0.0, 9.0}), Error);
}

TEST(Sidecar, DecodeErrors) {
    Sidecar good = encode_sidecar({1.0, 0.1, -0.5});
    Sidecar bad = good;
    bad[0] = 'X';
    EXPECT_EQ(decode_error(bad), ErrorCode::BadMagic);
    bad = good;
    bad[4] = 2;
    EXPECT_EQ(decode_error(bad), ErrorCode::BadVersion);
    EXPECT_EQ(decode_error(std::span(good).first(10)), ErrorCode::TruncatedSidecar);
    EXPECT_EQ(decode_error(std::span(good).first(4)), ErrorCode::TruncatedSidecar);
    EXPECT_EQ(decode_error(std::span(good).first(0)), ErrorCode::TruncatedSidecar);
    const std::uint8_t junk[] = {'P', '6'};
    EXPECT_EQ(decode_error(junk), ErrorCode::BadMagic);
}

} // namespace
} // namespace noisegen
