#ifndef NOISEGEN_COLORSPACE_HPP
#define NOISEGEN_COLORSPACE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "noisegen/image.hpp"
#include "noisegen/parallel.hpp"

namespace noisegen {

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Opsin absorbance constants: the RGB -> LMS mixing matrix and the XYB
/// channel gains. The inverse mix is computed once, here.
class OpsinConstants {
public:
    static constexpr Matrix3 kDefaultMix{{
        {0.355, 0.589, 0.056},
        {0.251, 0.715, 0.034},
        {0.092, 0.165, 0.743},
    }};

    explicit OpsinConstants(const Matrix3& mix = kDefaultMix, double h_l = 1.0, double h_m = 1.0,
                            double h_b = 1.0)
        : mix_(mix), h_l_(h_l), h_m_(h_m), h_b_(h_b) {
        const auto& m = mix_;
        const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if (!(std::abs(det) >= 1e-12)) {
            throw Error(ErrorCode::DegenerateConstants,
                        "mix matrix is not invertible (det=" + std::to_string(det) + ")");
        }
        const double inv_det = 1.0 / det;
        inverse_[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
        inverse_[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
        inverse_[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
        inverse_[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
        inverse_[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
        inverse_[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
        inverse_[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
        inverse_[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
        inverse_[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    }

    const Matrix3& mix() const noexcept { return mix_; }
    const Matrix3& inverse_mix() const noexcept { return inverse_; }
    double h_l() const noexcept { return h_l_; }
    double h_m() const noexcept { return h_m_; }
    double h_b() const noexcept { return h_b_; }

private:
    Matrix3 mix_;
    Matrix3 inverse_{};
    double h_l_;
    double h_m_;
    double h_b_;
};

inline const OpsinConstants& default_opsin() {
    static const OpsinConstants constants;
    return constants;
}

inline constexpr double kRgbRangeTolerance = 1e-6;

/// 8-bit-range RGB to cube-root gamma corrected LMS.
inline PlanarImage rgb_to_glms(const PlanarImage& rgb, const OpsinConstants& k = default_opsin(),
                               unsigned threads = 1) {
    require_space(rgb, ColorSpace::RGB, "rgb_to_glms");
    for (std::size_t c = 0; c < 3; ++c) {
        for (double v : rgb.plane(c).values()) {
            if (!(v >= -kRgbRangeTolerance && v <= 255.0 + kRgbRangeTolerance)) {
                throw Error(ErrorCode::OutOfRange, "RGB value " + std::to_string(v) + " outside [0,255]");
            }
        }
    }
    PlanarImage out(rgb.width(), rgb.height(), ColorSpace::GLMS);
    const Matrix3& m = k.mix();
    for_each_row(rgb.height(), threads, [&](std::size_t y) {
        const auto r = rgb.plane(0).row(y);
        const auto g = rgb.plane(1).row(y);
        const auto b = rgb.plane(2).row(y);
        std::array<std::span<double>, 3> dst{out.plane(0).row(y), out.plane(1).row(y), out.plane(2).row(y)};
        for (std::size_t x = 0; x < rgb.width(); ++x) {
            const double rv = std::clamp(r[x], 0.0, 255.0) / 255.0;
            const double gv = std::clamp(g[x], 0.0, 255.0) / 255.0;
            const double bv = std::clamp(b[x], 0.0, 255.0) / 255.0;
            for (std::size_t c = 0; c < 3; ++c) {
                const double lms = m[c][0] * rv + m[c][1] * gv + m[c][2] * bv;
                dst[c][x] = std::cbrt(std::clamp(lms, 0.0, 1.0));
            }
        }
    });
    return out;
}

inline PlanarImage glms_to_xyb(const PlanarImage& glms, const OpsinConstants& k = default_opsin(),
                               unsigned threads = 1) {
    require_space(glms, ColorSpace::GLMS, "glms_to_xyb");
    PlanarImage out(glms.width(), glms.height(), ColorSpace::XYB);
    for_each_row(glms.height(), threads, [&](std::size_t y) {
        const auto l = glms.plane(0).row(y);
        const auto m = glms.plane(1).row(y);
        const auto s = glms.plane(2).row(y);
        auto ox = out.plane(0).row(y);
        auto oy = out.plane(1).row(y);
        auto ob = out.plane(2).row(y);
        for (std::size_t x = 0; x < glms.width(); ++x) {
            const double hl = k.h_l() * l[x];
            const double hm = k.h_m() * m[x];
            ox[x] = 0.5 * (hl - hm);
            oy[x] = 0.5 * (hl + hm);
            ob[x] = s[x];
        }
    });
    return out;
}

/// Inverse of glms_to_xyb. Channels are clamped to [0,1] since added noise
/// can legitimately push them out of gamut.
inline PlanarImage xyb_to_glms(const PlanarImage& xyb, const OpsinConstants& k = default_opsin(),
                               unsigned threads = 1) {
    require_space(xyb, ColorSpace::XYB, "xyb_to_glms");
    if (k.h_l() == 0.0 || k.h_m() == 0.0) {
        throw Error(ErrorCode::DegenerateConstants, "H_L and H_M must be non-zero");
    }
    PlanarImage out(xyb.width(), xyb.height(), ColorSpace::GLMS);
    for_each_row(xyb.height(), threads, [&](std::size_t y) {
        const auto px = xyb.plane(0).row(y);
        const auto py = xyb.plane(1).row(y);
        const auto pb = xyb.plane(2).row(y);
        auto ol = out.plane(0).row(y);
        auto om = out.plane(1).row(y);
        auto os = out.plane(2).row(y);
        for (std::size_t x = 0; x < xyb.width(); ++x) {
            ol[x] = std::clamp((py[x] + px[x]) / k.h_l(), 0.0, 1.0);
            om[x] = std::clamp((py[x] - px[x]) / k.h_m(), 0.0, 1.0);
            os[x] = std::clamp(pb[x], 0.0, 1.0);
        }
    });
    return out;
}

inline PlanarImage glms_to_rgb(const PlanarImage& glms, const OpsinConstants& k = default_opsin(),
                               unsigned threads = 1) {
    require_space(glms, ColorSpace::GLMS, "glms_to_rgb");
    PlanarImage out(glms.width(), glms.height(), ColorSpace::RGB);
    const Matrix3& inv = k.inverse_mix();
    for_each_row(glms.height(), threads, [&](std::size_t y) {
        const auto l = glms.plane(0).row(y);
        const auto m = glms.plane(1).row(y);
        const auto s = glms.plane(2).row(y);
        std::array<std::span<double>, 3> dst{out.plane(0).row(y), out.plane(1).row(y), out.plane(2).row(y)};
        for (std::size_t x = 0; x < glms.width(); ++x) {
            const double lv = l[x] * l[x] * l[x] * 255.0;
            const double mv = m[x] * m[x] * m[x] * 255.0;
            const double sv = s[x] * s[x] * s[x] * 255.0;
            for (std::size_t c = 0; c < 3; ++c) {
                dst[c][x] = std::clamp(inv[c][0] * lv + inv[c][1] * mv + inv[c][2] * sv, 0.0, 255.0);
            }
        }
    });
    return out;
}

} // namespace noisegen

#endif
