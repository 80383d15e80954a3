#ifndef NOISEGEN_REGEN_HPP
#define NOISEGEN_REGEN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "noisegen/colorspace.hpp"
#include "noisegen/image.hpp"
#include "noisegen/model_fit.hpp"
#include "noisegen/noise_metric.hpp"
#include "noisegen/parallel.hpp"

namespace noisegen {

enum class MatrixId : std::uint8_t { L = 0, M = 1, Correlated = 2 };

/// splitmix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless counter-based generator: every (seed, matrix, x, y, draw) tuple
/// maps to its own uniform value in [0,1), independent of evaluation order.
class RngStream {
public:
    /// All draws of one (matrix, draw index) pair share a key prefix.
    class Lane {
    public:
        constexpr double uniform(std::uint32_t x, std::uint32_t y) const {
            const std::uint64_t h = mix64(prefix_ ^ (static_cast<std::uint64_t>(x) | static_cast<std::uint64_t>(y) << 32));
            return static_cast<double>(h >> 11) * 0x1.0p-53;
        }

    private:
        friend class RngStream;
        constexpr explicit Lane(std::uint64_t prefix) : prefix_(prefix) {}
        std::uint64_t prefix_;
    };

    constexpr explicit RngStream(std::uint64_t seed = 0) : seed_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }

    constexpr Lane lane(MatrixId id, std::uint32_t draw) const {
        const std::uint64_t key = static_cast<std::uint64_t>(id) << 8 | draw;
        return Lane(mix64(mix64(seed_ + 0x9e3779b97f4a7c15ULL) ^ (key * 0x9e3779b97f4a7c15ULL)));
    }

    constexpr double uniform(MatrixId id, std::uint32_t x, std::uint32_t y, std::uint32_t draw) const {
        return lane(id, draw).uniform(x, y);
    }

private:
    std::uint64_t seed_;
};

/// Half-width of the neighborhood a pixel's subtrahend is drawn from (5x5 window).
inline constexpr int kNeighborRadius = 2;

namespace detail {

inline constexpr std::size_t kWindowCells = (2 * kNeighborRadius + 1) * (2 * kNeighborRadius + 1) - 1;

struct WindowOffset {
    int dy = 0;
    int dx = 0;
};

constexpr std::array<WindowOffset, kWindowCells> window_offsets() {
    std::array<WindowOffset, kWindowCells> out{};
    std::size_t n = 0;
    for (int dy = -kNeighborRadius; dy <= kNeighborRadius; ++dy) {
        for (int dx = -kNeighborRadius; dx <= kNeighborRadius; ++dx) {
            if (dy != 0 || dx != 0) out[n++] = {dy, dx};
        }
    }
    return out;
}

inline constexpr auto kWindowOffsets = window_offsets();

inline std::size_t clamp_coord(std::ptrdiff_t v, std::size_t extent) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(extent) - 1));
}

} // namespace detail

/// Uniform noise with a randomly chosen neighbor subtracted from every pixel.
///
/// Stage one fills U from draw 0; stage two picks the neighbor from draw 1 and
/// reads only U, so rows can be produced in any order.
inline Plane generate_highpass(std::size_t width, std::size_t height, const RngStream& stream, MatrixId id,
                               unsigned threads = 1) {
    if (width < 2 || height < 2) {
        throw Error(ErrorCode::OutOfRange, "noise matrix must be at least 2x2");
    }
    Plane base(width, height);
    const auto base_lane = stream.lane(id, 0);
    for_each_row(height, threads, [&](std::size_t y) {
        auto row = base.row(y);
        for (std::size_t x = 0; x < width; ++x) {
            row[x] = base_lane.uniform(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
        }
    });

    Plane out(width, height);
    const auto pick_lane = stream.lane(id, 1);
    for_each_row(height, threads, [&](std::size_t y) {
        auto row = out.row(y);
        for (std::size_t x = 0; x < width; ++x) {
            const double u = pick_lane.uniform(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
            const auto k = std::min(detail::kWindowCells - 1, static_cast<std::size_t>(u * detail::kWindowCells));
            const detail::WindowOffset off = detail::kWindowOffsets[k];
            const std::size_t nx = detail::clamp_coord(static_cast<std::ptrdiff_t>(x) + off.dx, width);
            const std::size_t ny = detail::clamp_coord(static_cast<std::ptrdiff_t>(y) + off.dy, height);
            row[x] = base(x, y) - base(nx, ny);
        }
    });
    return out;
}

/// (1 / (W*H)) * sum of |Laplacian| over interior pixels.
///
/// Per-row partial sums are combined in row order so the result does not
/// depend on the thread count.
inline double laplacian_energy(const Plane& m, unsigned threads = 1) {
    if (m.width() < 3 || m.height() < 3) return 0.0;
    std::vector<double> rows(m.height(), 0.0);
    for_each_row(m.height() - 2, threads, [&](std::size_t r) {
        const std::size_t y = r + 1;
        double sum = 0.0;
        for (std::size_t x = 1; x + 1 < m.width(); ++x) sum += std::abs(laplacian_at(m, x, y));
        rows[y] = sum;
    });
    double total = 0.0;
    for (double v : rows) total += v;
    return total / static_cast<double>(m.size());
}

/// Scales the matrix to unit mean absolute Laplacian response.
inline Plane normalize_highpass(const Plane& m, unsigned threads = 1) {
    const double s = laplacian_energy(m, threads);
    if (!(s >= 1e-12)) {
        throw Error(ErrorCode::DegenerateMatrix, "matrix has no Laplacian energy");
    }
    Plane out = m;
    for (double& v : out.values()) v /= s;
    return out;
}

struct NoiseField {
    Plane r_l;
    Plane r_m;
    Plane r_c;
    std::uint64_t seed = 0;
    double psi = 0.1;
};

inline NoiseField make_noise_field(std::size_t width, std::size_t height, std::uint64_t seed, double psi = 0.1,
                                   unsigned threads = 1) {
    if (!(psi >= 0.0 && psi <= 1.0)) {
        throw Error(ErrorCode::OutOfRange, "psi must lie in [0,1]");
    }
    const RngStream stream(seed);
    NoiseField field;
    field.r_l = normalize_highpass(generate_highpass(width, height, stream, MatrixId::L, threads), threads);
    field.r_m = normalize_highpass(generate_highpass(width, height, stream, MatrixId::M, threads), threads);
    field.r_c = normalize_highpass(generate_highpass(width, height, stream, MatrixId::Correlated, threads), threads);
    field.seed = seed;
    field.psi = psi;
    return field;
}

struct NoiseLevelMap {
    Plane n_l;
    Plane n_m;
};

/// Per-pixel predicted noise level of the L' and M' planes.
inline NoiseLevelMap noise_levels(const PlanarImage& glms, const NoiseModel& model, unsigned threads = 1) {
    require_space(glms, ColorSpace::GLMS, "noise_levels");
    NoiseLevelMap levels{Plane(glms.width(), glms.height()), Plane(glms.width(), glms.height())};
    for_each_row(glms.height(), threads, [&](std::size_t y) {
        const auto l = glms.plane(0).row(y);
        const auto m = glms.plane(1).row(y);
        auto nl = levels.n_l.row(y);
        auto nm = levels.n_m.row(y);
        for (std::size_t x = 0; x < glms.width(); ++x) {
            nl[x] = predict(model, l[x]);
            nm[x] = predict(model, m[x]);
        }
    });
    return levels;
}

inline void scale_levels(NoiseLevelMap& levels, double k) {
    for (double& v : levels.n_l.values()) v *= k;
    for (double& v : levels.n_m.values()) v *= k;
}

/// The (dX, dY, dB) perturbation that apply_noise adds, tagged XYB.
inline PlanarImage noise_perturbation(const NoiseLevelMap& levels, const NoiseField& field,
                                      const OpsinConstants& k = default_opsin(), unsigned threads = 1) {
    const Plane& nl_plane = levels.n_l;
    if (!nl_plane.same_shape(levels.n_m) || !nl_plane.same_shape(field.r_l) || !nl_plane.same_shape(field.r_m) ||
        !nl_plane.same_shape(field.r_c)) {
        throw Error(ErrorCode::DimensionMismatch, "noise levels and noise field differ in size");
    }
    PlanarImage delta(nl_plane.width(), nl_plane.height(), ColorSpace::XYB);
    const double psi = field.psi;
    const double shared = 1.0 - psi;
    const double h_b = k.h_b();
    for_each_row(nl_plane.height(), threads, [&](std::size_t y) {
        const auto nl = levels.n_l.row(y);
        const auto nm = levels.n_m.row(y);
        const auto rl = field.r_l.row(y);
        const auto rm = field.r_m.row(y);
        const auto rc = field.r_c.row(y);
        auto dx = delta.plane(0).row(y);
        auto dy = delta.plane(1).row(y);
        auto db = delta.plane(2).row(y);
        for (std::size_t x = 0; x < nl_plane.width(); ++x) {
            const double own_l = nl[x] * rl[x];
            const double own_m = nm[x] * rm[x];
            const double corr_sum = shared * rc[x] * (nl[x] + nm[x]);
            dx[x] = psi * (own_l - own_m) + shared * rc[x] * (nl[x] - nm[x]);
            dy[x] = psi * (own_l + own_m) + corr_sum;
            db[x] = h_b * psi * (own_l + own_m) + corr_sum;
        }
    });
    return delta;
}

/// Returns a copy of `xyb` with the synthesized noise added to every channel.
inline PlanarImage apply_noise(const PlanarImage& xyb, const NoiseLevelMap& levels, const NoiseField& field,
                               const OpsinConstants& k = default_opsin(), unsigned threads = 1) {
    require_space(xyb, ColorSpace::XYB, "apply_noise");
    if (!xyb.plane(0).same_shape(levels.n_l)) {
        throw Error(ErrorCode::DimensionMismatch, "image and noise levels differ in size");
    }
    const PlanarImage delta = noise_perturbation(levels, field, k, threads);
    PlanarImage out = xyb;
    for (std::size_t c = 0; c < 3; ++c) {
        auto dst = out.plane(c).values();
        const auto src = delta.plane(c).values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return out;
}

} // namespace noisegen

#endif
