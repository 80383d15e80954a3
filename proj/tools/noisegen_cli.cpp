#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "noisegen/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Estimate a compact intensity-dependent noise model and re-synthesize matching noise"};
    app.require_subcommand(1);

    noisegen::EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Fit the noise model of an image and write the sidecar");
    estimate->add_option("input", est.input, "8-bit RGB PNG or P6 PPM")->required();
    estimate->add_option("sidecar", est.sidecar, "Output sidecar path (11 bytes)")->required();
    std::string report;
    estimate->add_option("--report", report, "Write the report here instead of stdout");
    estimate->add_option("--threads", est.threads, "Worker threads")->check(CLI::PositiveNumber);

    noisegen::ApplyArgs app_args;
    std::string dump;
    auto* apply = app.add_subcommand("apply", "Add noise described by a sidecar to an image");
    apply->add_option("input", app_args.input)->required();
    apply->add_option("sidecar", app_args.sidecar)->required();
    apply->add_option("output", app_args.output, "Output image (.png or .ppm)")->required();
    apply->add_option("--seed", app_args.options.seed, "Noise seed")->capture_default_str();
    apply->add_option("--psi", app_args.options.psi, "Color/gray noise balance")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    apply->add_option("--level-scale", app_args.options.level_scale, "Multiplier on the predicted noise levels")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    apply->add_option("--dump-float", dump, "Write the XYB perturbation as raw LE float32 planes");
    apply->add_option("--threads", app_args.options.threads, "Worker threads")->check(CLI::PositiveNumber);

    noisegen::RoundtripArgs rt;
    auto* round = app.add_subcommand("roundtrip", "Estimate, blur as a lossy-coding stand-in, and restore noise");
    round->add_option("input", rt.input)->required();
    round->add_option("output", rt.output)->required();
    round->add_option("--blur-sigma", rt.blur_sigma)->check(CLI::NonNegativeNumber)->capture_default_str();
    round->add_option("--seed", rt.options.seed)->capture_default_str();
    round->add_option("--psi", rt.options.psi)->check(CLI::Range(0.0, 1.0))->capture_default_str();

    noisegen::SurveyArgs sv;
    auto* survey = app.add_subcommand("survey", "Dump per-patch homogeneity scores and the threshold");
    survey->add_option("input", sv.input)->required();

    CLI11_PARSE(app, argc, argv);

    if (*estimate) {
        if (!report.empty()) est.report = report;
        return noisegen::cmd_estimate(est, std::cout, std::cerr);
    }
    if (*apply) {
        if (!dump.empty()) app_args.dump_float = dump;
        return noisegen::cmd_apply(app_args, std::cerr);
    }
    if (*round) return noisegen::cmd_roundtrip(rt, std::cout, std::cerr);
    return noisegen::cmd_survey(sv, std::cout, std::cerr);
}
