#ifndef NOISEGEN_NOISE_METRIC_HPP
#define NOISEGEN_NOISE_METRIC_HPP

#include <array>
#include <cmath>
#include <string>

#include "noisegen/image.hpp"

namespace noisegen {

/// 3x3 discrete Laplace operator. Entries sum to zero.
inline constexpr std::array<std::array<int, 3>, 3> kLaplacianKernel{{
    {0, 1, 0},
    {1, -4, 1},
    {0, 1, 0},
}};

/// Laplacian response at an interior pixel (1 <= x < w-1, 1 <= y < h-1).
inline double laplacian_at(const Plane& p, std::size_t x, std::size_t y) {
    return (p(x, y - 1) + p(x - 1, y) + p(x + 1, y) + p(x, y + 1)) - 4.0 * p(x, y);
}

inline bool has_laplacian_margin(const Plane& plane, PatchAnchor patch) {
    return patch.x0 >= 1 && patch.y0 >= 1 && patch.x0 + kPatchSize + 1 <= plane.width() &&
           patch.y0 + kPatchSize + 1 <= plane.height();
}

/// Mean absolute Laplacian response over the 64 pixels of an 8x8 patch.
///
/// The stencil reads the true neighboring image pixels, so the patch needs a
/// one-pixel margin on every side; patches without one throw MarginUnavailable.
inline double laplacian_noise_level(const Plane& plane, PatchAnchor patch) {
    if (!has_laplacian_margin(plane, patch)) {
        throw Error(ErrorCode::MarginUnavailable,
                    "patch at (" + std::to_string(patch.x0) + "," + std::to_string(patch.y0) +
                        ") touches the image border");
    }
    double sum = 0.0;
    for (std::size_t y = patch.y0; y < patch.y0 + kPatchSize; ++y) {
        for (std::size_t x = patch.x0; x < patch.x0 + kPatchSize; ++x) {
            sum += std::abs(laplacian_at(plane, x, y));
        }
    }
    return sum / static_cast<double>(kPatchPixels);
}

} // namespace noisegen

#endif
