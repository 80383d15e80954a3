#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "noisegen/noise_metric.hpp"
#include "test_util.hpp"

namespace noisegen {
namespace {

// Dense 2-D convolution with the full 3x3 kernel (zeros included), then the
// mean absolute response over the patch.
double dense_oracle(const Plane& p, PatchAnchor a) {
    double sum = 0;
    for (std::size_t y = a.y0; y < a.y0 + 8; ++y) {
        for (std::size_t x = a.x0; x < a.x0 + 8; ++x) {
            double acc = 0;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    // Flipped kernel index; the stencil is symmetric anyway.
                    acc += kLaplacianKernel[2 - ky][2 - kx] * p(x + kx - 1, y + ky - 1);
                }
            }
            sum += std::abs(acc);
        }
    }
    return sum / 64.0;
}

TEST(LaplacianKernel, SumsToZero) {
    int sum = 0;
    for (const auto& row : kLaplacianKernel) {
        for (int v : row) sum += v;
    }
    EXPECT_EQ(sum, 0);
}

TEST(LaplacianNoiseLevel, ConstantRegionIsZero) {
    const Plane p(10, 10, 0.61);
    EXPECT_EQ(laplacian_noise_level(p, {1, 1}), 0.0);
}

TEST(LaplacianNoiseLevel, SingleImpulse) {
    for (double a : {0.25, 0.1, 1.0, 0.0371}) {
        Plane p(10, 10, 0.2);
        p(5, 4) += a;
        EXPECT_NEAR(laplacian_noise_level(p, {1, 1}), 8.0 * a / 64.0, 1e-12);
    }
}

TEST(LaplacianNoiseLevel, ShiftInvariantBitExact) {
    // Values on a dyadic grid keep I + c exactly representable.
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> q(0, 1 << 20);
    for (int trial = 0; trial < 200; ++trial) {
        Plane p(10, 10);
        for (double& v : p.values()) v = std::ldexp(q(rng), -21);
        Plane shifted = p;
        const double c = std::ldexp(q(rng), -21);
        for (double& v : shifted.values()) v += c;
        EXPECT_EQ(laplacian_noise_level(shifted, {1, 1}), laplacian_noise_level(p, {1, 1}));
    }
}

TEST(LaplacianNoiseLevel, HomogeneousOfDegreeOne) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Plane p = test::random_plane(10, 10, rng);
        const double a = u(rng);
        Plane scaled = p;
        for (double& v : scaled.values()) v *= a;
        const double base = laplacian_noise_level(p, {1, 1});
        EXPECT_NEAR(laplacian_noise_level(scaled, {1, 1}), a * base, 1e-14 * (1 + a * base));
    }
}

TEST(LaplacianNoiseLevel, AgreesWithDenseConvolution) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const Plane p = test::random_plane(10, 10, rng);
        EXPECT_NEAR(laplacian_noise_level(p, {1, 1}), dense_oracle(p, {1, 1}), 1e-12);
    }
}

TEST(LaplacianNoiseLevel, BorderPatchesRejected) {
    const Plane p(24, 24, 0.5);
    for (PatchAnchor a : {PatchAnchor{0, 8}, PatchAnchor{8, 0}, PatchAnchor{16, 8}, PatchAnchor{8, 16}}) {
        try {
            laplacian_noise_level(p, a);
            FAIL() << a.x0 << "," << a.y0;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::MarginUnavailable);
        }
    }
    EXPECT_NO_THROW(laplacian_noise_level(p, {8, 8}));
}

} // namespace
} // namespace noisegen
