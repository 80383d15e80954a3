#ifndef NOISEGEN_PATCH_SELECTION_HPP
#define NOISEGEN_PATCH_SELECTION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "noisegen/image.hpp"
#include "noisegen/parallel.hpp"

namespace noisegen {

struct BlockOffset {
    int dy = 0;
    int dx = 0;
};

/// Placement of the SAD blocks inside an 8x8 patch: a 3x4 center block whose
/// top-left sits at patch-relative (row 2, col 2), and eight neighbor blocks
/// displaced by {-2,0,+2}^2 \ {(0,0)}. Every block stays inside the patch.
struct BlockLayout {
    static constexpr std::size_t kNeighbors = 8;

    std::size_t block_h = 3;
    std::size_t block_w = 4;
    std::size_t center_row = 2;
    std::size_t center_col = 2;
    std::array<BlockOffset, kNeighbors> neighbors{{
        {-2, -2}, {-2, 0}, {-2, 2}, {0, -2}, {0, 2}, {2, -2}, {2, 0}, {2, 2},
    }};

    std::size_t block_pixels() const noexcept { return block_h * block_w; }
};

/// Non-overlapping 8x8 tiles; partial tiles at the right/bottom edge are dropped.
inline std::vector<PatchAnchor> patch_grid(std::size_t width, std::size_t height) {
    std::vector<PatchAnchor> anchors;
    for (std::size_t y0 = 0; y0 + kPatchSize <= height; y0 += kPatchSize) {
        for (std::size_t x0 = 0; x0 + kPatchSize <= width; x0 += kPatchSize) {
            anchors.push_back({x0, y0});
        }
    }
    return anchors;
}

/// Sum of absolute differences between the center block and neighbor block
/// `neighbor` (0-based, < BlockLayout::kNeighbors).
inline double sad_score(const Plane& plane, PatchAnchor patch, const BlockLayout& layout, std::size_t neighbor) {
    const BlockOffset off = layout.neighbors[neighbor];
    const std::size_t cy = patch.y0 + layout.center_row;
    const std::size_t cx = patch.x0 + layout.center_col;
    const std::size_t ny = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cy) + off.dy);
    const std::size_t nx = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cx) + off.dx);
    double sum = 0.0;
    for (std::size_t i = 0; i < layout.block_h; ++i) {
        for (std::size_t j = 0; j < layout.block_w; ++j) {
            sum += std::abs(plane(cx + j, cy + i) - plane(nx + j, ny + i));
        }
    }
    return sum;
}

/// Rank-ordered reduction: (2/K) times the sum of the K/2 smallest scores.
inline double road_from_sads(std::span<const double> sads) {
    std::vector<double> sorted(sads.begin(), sads.end());
    const std::size_t half = sorted.size() / 2;
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(half), sorted.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < half; ++i) sum += sorted[i];
    return 2.0 / static_cast<double>(sorted.size()) * sum;
}

inline double road_homogeneity(const Plane& plane, PatchAnchor patch, const BlockLayout& layout = {}) {
    std::array<double, BlockLayout::kNeighbors> sads{};
    for (std::size_t l = 0; l < sads.size(); ++l) sads[l] = sad_score(plane, patch, layout, l);
    return road_from_sads(sads);
}

struct SurveyParams {
    BlockLayout layout{};
    /// Upper bound on the threshold, per pixel of a SAD block.
    double t_max = 0.2;
    std::size_t bins = 255;
    /// Histogram range [0, hist_max]; larger scores land in the last bin.
    double hist_max = 1.0;
    unsigned threads = 1;
};

struct HomogeneitySurvey {
    std::vector<PatchAnchor> patches;
    /// ROAD score of each patch divided by the SAD block pixel count, so that
    /// it is expressed per pixel like t_max and hist_max.
    std::vector<double> scores;
    std::vector<std::uint64_t> histogram;
    double peak = 0.0;      // T_p
    double threshold = 0.0; // T
    std::vector<PatchAnchor> selected;
};

/// Center of the most populated bin; ties resolve to the lowest bin.
inline double histogram_peak(std::span<const std::uint64_t> counts, double hist_max) {
    const auto it = std::max_element(counts.begin(), counts.end());
    const auto k = static_cast<double>(it - counts.begin());
    return (k + 0.5) * hist_max / static_cast<double>(counts.size());
}

inline double select_threshold(double peak, double t_max) { return std::min(peak, t_max); }

inline std::vector<std::uint64_t> score_histogram(std::span<const double> scores, std::size_t bins,
                                                  double hist_max) {
    std::vector<std::uint64_t> counts(bins, 0);
    for (double s : scores) {
        if (!std::isfinite(s)) continue;
        const double pos = std::max(0.0, s) / hist_max * static_cast<double>(bins);
        const auto k = std::min<std::size_t>(bins - 1, static_cast<std::size_t>(pos));
        ++counts[k];
    }
    return counts;
}

/// Scores every patch of the L' plane and thresholds at the histogram peak.
/// Does not complain about an empty selection; see build_survey.
inline HomogeneitySurvey compute_survey(const PlanarImage& glms, const SurveyParams& params = {}) {
    require_space(glms, ColorSpace::GLMS, "build_survey");
    if (glms.width() < kPatchSize || glms.height() < kPatchSize) {
        throw Error(ErrorCode::DegenerateImage, "image smaller than one 8x8 patch");
    }
    HomogeneitySurvey survey;
    survey.patches = patch_grid(glms.width(), glms.height());
    if (survey.patches.size() < 4) {
        throw Error(ErrorCode::DegenerateImage,
                    "only " + std::to_string(survey.patches.size()) + " patches, need at least 4");
    }
    const Plane& lum = glms.plane(0);
    const double scale = 1.0 / static_cast<double>(params.layout.block_pixels());
    survey.scores.resize(survey.patches.size());
    const std::size_t per_row = glms.width() / kPatchSize;
    const std::size_t patch_rows = survey.patches.size() / per_row;
    for_each_row(patch_rows, params.threads, [&](std::size_t row) {
        for (std::size_t i = row * per_row; i < (row + 1) * per_row; ++i) {
            survey.scores[i] = road_homogeneity(lum, survey.patches[i], params.layout) * scale;
        }
    });

    survey.histogram = score_histogram(survey.scores, params.bins, params.hist_max);
    survey.peak = histogram_peak(survey.histogram, params.hist_max);
    survey.threshold = select_threshold(survey.peak, params.t_max);
    for (std::size_t i = 0; i < survey.patches.size(); ++i) {
        if (survey.scores[i] < survey.threshold) survey.selected.push_back(survey.patches[i]);
    }
    return survey;
}

inline HomogeneitySurvey build_survey(const PlanarImage& glms, const SurveyParams& params = {}) {
    HomogeneitySurvey survey = compute_survey(glms, params);
    if (survey.selected.empty()) {
        throw Error(ErrorCode::EmptySelection,
                    "no patch scored below threshold " + std::to_string(survey.threshold));
    }
    return survey;
}

} // namespace noisegen

#endif
