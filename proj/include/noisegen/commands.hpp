#ifndef NOISEGEN_COMMANDS_HPP
#define NOISEGEN_COMMANDS_HPP

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>

#include "noisegen/pipeline.hpp"

namespace noisegen {

// Command bodies behind the noisegen executable. Each returns the process exit
// code and writes diagnostics to `err`.

struct EstimateArgs {
    std::filesystem::path input;
    std::filesystem::path sidecar;
    std::optional<std::filesystem::path> report;
    unsigned threads = 1;
};

struct ApplyArgs {
    std::filesystem::path input;
    std::filesystem::path sidecar;
    std::filesystem::path output;
    ApplyOptions options;
    std::optional<std::filesystem::path> dump_float;
};

struct RoundtripArgs {
    std::filesystem::path input;
    std::filesystem::path output;
    double blur_sigma = 1.2;
    ApplyOptions options;
};

struct SurveyArgs {
    std::filesystem::path input;
    unsigned threads = 1;
};

namespace detail {

inline std::optional<PlanarImage> load_or_report(const std::filesystem::path& path, std::ostream& err) {
    try {
        return load_image(path);
    } catch (const Error& e) {
        err << "error: cannot read image " << path.string() << ": " << e.what() << "\n";
        return std::nullopt;
    }
}

} // namespace detail

inline int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err) {
    const auto img = detail::load_or_report(args.input, err);
    if (!img) return kExitBadImage;
    if (img->width() < kMinEstimateSide || img->height() < kMinEstimateSide) {
        err << "error: image is " << img->width() << "x" << img->height() << ", estimation needs at least "
            << kMinEstimateSide << "x" << kMinEstimateSide << "\n";
        return kExitTooSmall;
    }
    try {
        SurveyParams params;
        params.threads = args.threads;
        const EstimateReport report = estimate_model(*img, params);
        const Sidecar bytes = encode_sidecar(report.model);
        write_file(args.sidecar, bytes.data(), bytes.size());
        if (report.warning) err << "warning: " << *report.warning << "\n";
        if (args.report) {
            std::ofstream rep(*args.report);
            write_report(rep, report);
            if (!rep) throw Error(ErrorCode::Io, "cannot write report " + args.report->string());
        } else {
            write_report(out, report);
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::DegenerateImage ? kExitTooSmall : kExitFailure;
    }
}

inline std::optional<NoiseModel> read_sidecar(const std::filesystem::path& path, std::ostream& err) {
    try {
        return decode_sidecar(read_file(path));
    } catch (const Error& e) {
        err << "error: bad sidecar " << path.string() << ": " << e.what() << "\n";
        return std::nullopt;
    }
}

inline int cmd_apply(const ApplyArgs& args, std::ostream& err) {
    const auto img = detail::load_or_report(args.input, err);
    if (!img) return kExitBadImage;
    const auto model = read_sidecar(args.sidecar, err);
    if (!model) return kExitBadSidecar;
    try {
        const ApplyResult result = apply_model(*img, *model, args.options);
        if (args.dump_float) write_float_planes(result.perturbation, *args.dump_float);
        save_image(result.rgb, args.output);
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

inline int cmd_roundtrip(const RoundtripArgs& args, std::ostream& out, std::ostream& err) {
    const auto img = detail::load_or_report(args.input, err);
    if (!img) return kExitBadImage;
    if (img->width() < kMinEstimateSide || img->height() < kMinEstimateSide) {
        err << "error: image is " << img->width() << "x" << img->height() << ", estimation needs at least "
            << kMinEstimateSide << "x" << kMinEstimateSide << "\n";
        return kExitTooSmall;
    }
    try {
        const RoundtripResult r = roundtrip(*img, args.blur_sigma, args.options);
        if (r.report.warning) err << "warning: " << *r.report.warning << "\n";
        save_image(r.restored, args.output);
        out << std::setprecision(9) << "input=" << r.energies.input << " blurred=" << r.energies.blurred
            << " restored=" << r.energies.restored << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::DegenerateImage ? kExitTooSmall : kExitFailure;
    }
}

/// Per-patch homogeneity scores plus the chosen peak and threshold.
inline int cmd_survey(const SurveyArgs& args, std::ostream& out, std::ostream& err) {
    const auto img = detail::load_or_report(args.input, err);
    if (!img) return kExitBadImage;
    try {
        SurveyParams params;
        params.threads = args.threads;
        const HomogeneitySurvey s = compute_survey(rgb_to_glms(*img), params);
        out << std::setprecision(9) << "peak=" << s.peak << "\nthreshold=" << s.threshold
            << "\nselected=" << s.selected.size() << "\n# x0 y0 score selected\n";
        for (std::size_t i = 0; i < s.patches.size(); ++i) {
            out << s.patches[i].x0 << " " << s.patches[i].y0 << " " << s.scores[i] << " "
                << (s.scores[i] < s.threshold ? 1 : 0) << "\n";
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::DegenerateImage ? kExitTooSmall : kExitFailure;
    }
}

} // namespace noisegen

#endif
