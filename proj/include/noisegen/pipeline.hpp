#ifndef NOISEGEN_PIPELINE_HPP
#define NOISEGEN_PIPELINE_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "noisegen/colorspace.hpp"
#include "noisegen/image.hpp"
#include "noisegen/image_io.hpp"
#include "noisegen/model_fit.hpp"
#include "noisegen/noise_metric.hpp"
#include "noisegen/patch_selection.hpp"
#include "noisegen/regen.hpp"
#include "noisegen/sidecar.hpp"

namespace noisegen {

// Process exit codes of the command-line front-end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadImage = 2;
inline constexpr int kExitTooSmall = 3;
inline constexpr int kExitBadSidecar = 4;

/// Smallest accepted side length for estimation: three tiles, so at least one
/// tile has a full Laplacian margin.
inline constexpr std::size_t kMinEstimateSide = 3 * kPatchSize;

struct EstimateReport {
    NoiseModel model = NoiseModel::null();
    std::size_t patch_count = 0;
    std::size_t sample_count = 0;
    double threshold = 0.0;
    double histogram_peak = 0.0;
    TrainingSet samples;
    std::optional<std::string> warning;
};

/// Mean intensity and noise level of every selected patch that has a full
/// Laplacian margin.
inline TrainingSet collect_samples(const Plane& lum, const std::vector<PatchAnchor>& selected) {
    TrainingSet ts;
    for (const PatchAnchor& p : selected) {
        if (!has_laplacian_margin(lum, p)) continue;
        ts.push_back({mean_intensity(lum, p), laplacian_noise_level(lum, p)});
    }
    return ts;
}

/// Encoder half: homogeneous patches -> training set -> fitted model.
/// Falls back to the null model (with a warning) when too few patches qualify.
inline EstimateReport estimate_model(const PlanarImage& rgb, const SurveyParams& survey_params = {},
                                     const FitConfig& fit_config = {}) {
    const PlanarImage glms = rgb_to_glms(rgb, default_opsin(), survey_params.threads);
    const HomogeneitySurvey survey = compute_survey(glms, survey_params);

    EstimateReport report;
    report.patch_count = survey.patches.size();
    report.threshold = survey.threshold;
    report.histogram_peak = survey.peak;
    report.samples = collect_samples(glms.plane(0), survey.selected);
    report.sample_count = report.samples.size();
    if (survey.selected.empty()) {
        report.warning = "no homogeneous patches selected; emitting null model";
    } else if (report.samples.size() < kMinSamples) {
        report.warning = std::to_string(report.samples.size()) + " usable samples (< " +
                         std::to_string(kMinSamples) + "); emitting null model";
    } else {
        report.model = fit(report.samples, fit_config);
    }
    return report;
}

inline void write_report(std::ostream& os, const EstimateReport& r) {
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << std::setprecision(9);
    os << "alpha=" << r.model.alpha << "\n";
    os << "beta=" << r.model.beta << "\n";
    os << "gamma=" << r.model.gamma << "\n";
    os << "patch_count=" << r.patch_count << "\n";
    os << "sample_count=" << r.sample_count << "\n";
    os << "threshold=" << r.threshold << "\n";
    os << "histogram_peak=" << r.histogram_peak << "\n";
    os << "warning=" << r.warning.value_or("none") << "\n";
    os << "# mean_intensity noise_level predicted\n";
    for (const Sample& s : r.samples) {
        os << s.intensity << " " << s.level << " " << predict(r.model, s.intensity) << "\n";
    }
    os.flags(flags);
    os.precision(precision);
}

struct ApplyOptions {
    std::uint64_t seed = 0;
    double psi = 0.1;
    double level_scale = 1.0;
    unsigned threads = 1;
};

struct ApplyResult {
    PlanarImage rgb;
    /// The XYB perturbation added to the image, before any clamping.
    PlanarImage perturbation;
};

/// Decoder half: RGB -> g-LMS -> XYB, add synthesized noise, back to RGB.
inline ApplyResult apply_model(const PlanarImage& rgb, const NoiseModel& model, const ApplyOptions& opt = {},
                               const OpsinConstants& k = default_opsin()) {
    const PlanarImage glms = rgb_to_glms(rgb, k, opt.threads);
    NoiseLevelMap levels = noise_levels(glms, model, opt.threads);
    if (opt.level_scale != 1.0) scale_levels(levels, opt.level_scale);
    const NoiseField field = make_noise_field(rgb.width(), rgb.height(), opt.seed, opt.psi, opt.threads);
    PlanarImage delta = noise_perturbation(levels, field, k, opt.threads);

    PlanarImage xyb = glms_to_xyb(glms, k, opt.threads);
    for (std::size_t c = 0; c < 3; ++c) {
        auto dst = xyb.plane(c).values();
        const auto src = delta.plane(c).values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return {glms_to_rgb(xyb_to_glms(xyb, k, opt.threads), k, opt.threads), std::move(delta)};
}

/// Raw little-endian float32 planes, channel after channel, rows top to bottom.
inline void write_float_planes(const PlanarImage& img, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(img.width() * img.height() * 3 * 4);
    for (std::size_t c = 0; c < 3; ++c) {
        for (double v : img.plane(c).values()) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
        }
    }
    write_file(path, bytes.data(), bytes.size());
}

inline std::vector<float> read_float_planes(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    std::vector<float> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

/// Separable Gaussian blur with edge clamping; sigma 0 is the identity.
inline PlanarImage gaussian_blur(const PlanarImage& img, double sigma) {
    if (!(sigma >= 0.0)) throw Error(ErrorCode::OutOfRange, "blur sigma must be non-negative");
    if (sigma == 0.0) return img;
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> weights(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        weights[static_cast<std::size_t>(i + radius)] = w;
        total += w;
    }
    for (double& w : weights) w /= total;

    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    auto at = [](std::ptrdiff_t v, std::ptrdiff_t n) { return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, n - 1)); };
    PlanarImage out = img;
    for (std::size_t c = 0; c < 3; ++c) {
        const Plane& src = img.plane(c);
        Plane tmp(src.width(), src.height());
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
                    acc += weights[static_cast<std::size_t>(i + radius)] * src(at(x + i, w), static_cast<std::size_t>(y));
                }
                tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
            }
        }
        Plane& dst = out.plane(c);
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
                    acc += weights[static_cast<std::size_t>(i + radius)] * tmp(static_cast<std::size_t>(x), at(y + i, h));
                }
                dst(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
            }
        }
    }
    return out;
}

/// Mean noise level over every 8x8 tile of the plane that has a Laplacian margin.
inline double mean_patch_noise_level(const Plane& lum) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const PatchAnchor& p : patch_grid(lum.width(), lum.height())) {
        if (!has_laplacian_margin(lum, p)) continue;
        sum += laplacian_noise_level(lum, p);
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

inline double mean_patch_noise_level(const PlanarImage& rgb) {
    return mean_patch_noise_level(rgb_to_glms(rgb).plane(0));
}

struct RoundtripEnergies {
    double input = 0.0;
    double blurred = 0.0;
    double restored = 0.0;
};

struct RoundtripResult {
    EstimateReport report;
    PlanarImage blurred;  // quantized to 8 bits, like a decoded image
    PlanarImage restored; // quantized to 8 bits
    RoundtripEnergies energies;
};

/// Estimate, blur as a stand-in for lossy coding, then re-add noise.
inline RoundtripResult roundtrip(const PlanarImage& rgb, double blur_sigma, const ApplyOptions& opt = {}) {
    RoundtripResult r;
    r.report = estimate_model(rgb);
    r.blurred = to_planar(to_rgb8(gaussian_blur(rgb, blur_sigma)));
    r.restored = to_planar(to_rgb8(apply_model(r.blurred, r.report.model, opt).rgb));
    r.energies = {mean_patch_noise_level(rgb), mean_patch_noise_level(r.blurred), mean_patch_noise_level(r.restored)};
    return r;
}

} // namespace noisegen

#endif
