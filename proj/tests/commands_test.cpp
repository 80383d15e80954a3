#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "noisegen/commands.hpp"
#include "test_util.hpp"

namespace noisegen {
namespace {

class Commands : public ::testing::Test {
protected:
    std::filesystem::path dir = test::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::ostringstream out, err;

    std::filesystem::path write_gray(const std::string& name, std::size_t w, std::size_t h, double v) {
        PlanarImage img(w, h, ColorSpace::RGB);
        for (std::size_t c = 0; c < 3; ++c) {
            for (double& p : img.plane(c).values()) p = v;
        }
        save_image(img, dir / name);
        return dir / name;
    }

    std::filesystem::path write_noisy(const std::string& name, std::size_t w, std::size_t h) {
        const auto img = test::noisy_gray_ramp(w, h, 0.3, 0.9, [](double i) { return 0.02 / std::sqrt(i) + 0.01; }, 5);
        save_image(img, dir / name);
        return dir / name;
    }

    int estimate(const std::filesystem::path& in, const std::filesystem::path& sidecar) {
        return cmd_estimate({in, sidecar, std::nullopt, 1}, out, err);
    }
};

TEST_F(Commands, EstimateFlatGrayGivesSilentModel) {
    const auto in = write_gray("flat.png", 64, 64, 128);
    ASSERT_EQ(estimate(in, dir / "m.nrg"), kExitOk) << err.str();
    const auto bytes = read_file(dir / "m.nrg");
    ASSERT_EQ(bytes.size(), 11u);
    const NoiseModel m = decode_sidecar(bytes);
    for (double i = 0.1; i <= 1.0 + 1e-9; i += 0.05) EXPECT_LE(predict(m, i), 1e-3) << "i=" << i;
}

TEST_F(Commands, EstimateReportFormat) {
    const auto in = write_noisy("n.ppm", 128, 96);
    ASSERT_EQ(cmd_estimate({in, dir / "m.nrg", dir / "report.txt", 1}, out, err), kExitOk) << err.str();
    EXPECT_TRUE(out.str().empty());
    const auto bytes = read_file(dir / "report.txt");
    const std::string text(bytes.begin(), bytes.end());
    for (const char* key : {"alpha=", "beta=", "gamma=", "patch_count=192\n", "sample_count=", "threshold=",
                            "histogram_peak=", "warning=none\n", "# mean_intensity noise_level predicted\n"}) {
        EXPECT_NE(text.find(key), std::string::npos) << key;
    }
}

TEST_F(Commands, EstimateMatchesInMemoryFitWithinOneStep) {
    const auto in = write_noisy("n.ppm", 128, 128);
    ASSERT_EQ(estimate(in, dir / "m.nrg"), kExitOk) << err.str();
    const NoiseModel decoded = decode_sidecar(read_file(dir / "m.nrg"));
    const NoiseModel direct = estimate_model(load_image(in)).model;
    EXPECT_NE(direct, NoiseModel::null());
    EXPECT_LE(std::abs(decoded.alpha - direct.alpha), kAlphaRange.step());
    EXPECT_LE(std::abs(decoded.beta - direct.beta), kBetaRange.step());
    EXPECT_LE(std::abs(decoded.gamma - direct.gamma), kGammaRange.step());
}

TEST_F(Commands, EstimateExitCodes) {
    EXPECT_EQ(estimate(write_gray("tiny.ppm", 8, 8, 10), dir / "m.nrg"), kExitTooSmall);
    EXPECT_EQ(estimate(write_gray("thin.ppm", 100, 20, 10), dir / "m.nrg"), kExitTooSmall);
    EXPECT_FALSE(std::filesystem::exists(dir / "m.nrg"));
    EXPECT_EQ(estimate(dir / "nope.png", dir / "m.nrg"), kExitBadImage);
    write_file(dir / "junk.png", reinterpret_cast<const std::uint8_t*>("junkjunkjunk"), 12);
    EXPECT_EQ(estimate(dir / "junk.png", dir / "m.nrg"), kExitBadImage);
}

TEST_F(Commands, EstimateFallsBackToNullModel) {
    // 24x24 has a single tile with a full margin: too few samples to fit.
    ASSERT_EQ(estimate(write_gray("small.ppm", 24, 24, 90), dir / "m.nrg"), kExitOk);
    EXPECT_NE(err.str().find("warning:"), std::string::npos);
    const NoiseModel m = decode_sidecar(read_file(dir / "m.nrg"));
    EXPECT_EQ(m.alpha, 0.0);
    EXPECT_EQ(m.beta, 0.0);
}

TEST_F(Commands, ApplyExitCodes) {
    const auto in = write_gray("g.ppm", 32, 32, 100);
    const Sidecar good = encode_sidecar({0.01, 0.01, -0.5});
    write_file(dir / "good.nrg", good.data(), good.size());
    Sidecar bad = good;
    bad[1] = 'X';
    write_file(dir / "bad.nrg", bad.data(), bad.size());
    write_file(dir / "short.nrg", good.data(), 7);

    EXPECT_EQ(cmd_apply({in, dir / "good.nrg", dir / "o.ppm", {}, std::nullopt}, err), kExitOk);
    EXPECT_EQ(cmd_apply({in, dir / "bad.nrg", dir / "o.ppm", {}, std::nullopt}, err), kExitBadSidecar);
    EXPECT_EQ(cmd_apply({in, dir / "short.nrg", dir / "o.ppm", {}, std::nullopt}, err), kExitBadSidecar);
    EXPECT_EQ(cmd_apply({in, dir / "missing.nrg", dir / "o.ppm", {}, std::nullopt}, err), kExitBadSidecar);
    EXPECT_EQ(cmd_apply({dir / "missing.ppm", dir / "good.nrg", dir / "o.ppm", {}, std::nullopt}, err), kExitBadImage);
}

TEST_F(Commands, ApplyZeroLevelScaleKeepsImage) {
    const auto in = write_noisy("n.ppm", 64, 48);
    const Sidecar s = encode_sidecar({0.3, 0.1, -0.5});
    write_file(dir / "m.nrg", s.data(), s.size());
    ApplyArgs args{in, dir / "m.nrg", dir / "o.ppm", {}, std::nullopt};
    args.options.level_scale = 0.0;
    ASSERT_EQ(cmd_apply(args, err), kExitOk);
    const Rgb8 a = read_rgb8(in), b = read_rgb8(dir / "o.ppm");
    for (std::size_t i = 0; i < a.pixels.size(); ++i) EXPECT_LE(std::abs(a.pixels[i] - b.pixels[i]), 1);
}

TEST_F(Commands, ApplyIsDeterministic) {
    const auto in = write_noisy("n.png", 80, 64);
    const Sidecar s = encode_sidecar({0.05, 0.01, -0.5});
    write_file(dir / "m.nrg", s.data(), s.size());
    ApplyArgs args{in, dir / "m.nrg", dir / "a.png", {}, std::nullopt};
    args.options.seed = 99;
    ASSERT_EQ(cmd_apply(args, err), kExitOk);
    args.output = dir / "b.png";
    args.options.threads = 3;
    ASSERT_EQ(cmd_apply(args, err), kExitOk);
    EXPECT_EQ(read_file(dir / "a.png"), read_file(dir / "b.png"));
    args.output = dir / "c.png";
    args.options.seed = 100;
    ASSERT_EQ(cmd_apply(args, err), kExitOk);
    EXPECT_NE(read_file(dir / "a.png"), read_file(dir / "c.png"));
}

TEST_F(Commands, DumpFloatScalesWithLevelScale) {
    const auto in = write_noisy("n.ppm", 40, 40);
    const Sidecar s = encode_sidecar({0.05, 0.01, -0.5});
    write_file(dir / "m.nrg", s.data(), s.size());
    ApplyArgs args{in, dir / "m.nrg", dir / "o1.ppm", {}, dir / "d1.f32"};
    ASSERT_EQ(cmd_apply(args, err), kExitOk);
    args.output = dir / "o2.ppm";
    args.dump_float = dir / "d2.f32";
    args.options.level_scale = 2.0;
    ASSERT_EQ(cmd_apply(args, err), kExitOk);
    const auto d1 = read_float_planes(dir / "d1.f32");
    const auto d2 = read_float_planes(dir / "d2.f32");
    ASSERT_EQ(d1.size(), 40u * 40u * 3u);
    ASSERT_EQ(d2.size(), d1.size());
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < d1.size(); ++i) {
        ASSERT_EQ(d2[i], 2.0f * d1[i]);
        nonzero += d1[i] != 0.0f;
    }
    EXPECT_GT(nonzero, d1.size() / 2);
}

TEST_F(Commands, RoundtripRestoresEnergy) {
    const auto in = write_noisy("n.ppm", 128, 128);
    ASSERT_EQ(cmd_roundtrip({in, dir / "r.ppm", 1.2, {}}, out, err), kExitOk) << err.str();
    EXPECT_TRUE(std::filesystem::exists(dir / "r.ppm"));
    EXPECT_NE(out.str().find("input="), std::string::npos);

    const RoundtripResult r = roundtrip(load_image(in), 1.2);
    EXPECT_LT(r.energies.blurred, r.energies.input);
    EXPECT_GT(r.energies.restored, r.energies.blurred);
}

TEST_F(Commands, RoundtripWithoutBlurAddsEnergy) {
    // Mean |Laplacian| of a sum of two independent noise fields is not
    // additive; it lands between the larger one and the plain sum.
    const auto img = load_image(write_noisy("n.ppm", 128, 128));
    const RoundtripResult r = roundtrip(img, 0.0);
    EXPECT_EQ(r.blurred, img);
    Plane diff = rgb_to_glms(r.restored).plane(0);
    const Plane base = rgb_to_glms(img).plane(0);
    for (std::size_t i = 0; i < diff.size(); ++i) diff.values()[i] -= base.values()[i];
    const double synthesized = mean_patch_noise_level(diff);
    const double sum = r.energies.input + synthesized;
    EXPECT_NEAR(r.energies.restored, sum, 0.3 * sum);
    EXPECT_GT(r.energies.restored, std::max(r.energies.input, synthesized));
}

TEST_F(Commands, RoundtripExitCodes) {
    EXPECT_EQ(cmd_roundtrip({dir / "missing.ppm", dir / "r.ppm", 1.2, {}}, out, err), kExitBadImage);
    EXPECT_EQ(cmd_roundtrip({write_gray("t.ppm", 16, 16, 5), dir / "r.ppm", 1.2, {}}, out, err), kExitTooSmall);
}

TEST_F(Commands, SurveyDump) {
    const auto in = write_gray("g.ppm", 32, 24, 50);
    ASSERT_EQ(cmd_survey({in, 1}, out, err), kExitOk);
    const std::string s = out.str();
    EXPECT_NE(s.find("threshold="), std::string::npos);
    EXPECT_NE(s.find("selected=12\n"), std::string::npos);
    EXPECT_NE(s.find("24 16 0 1\n"), std::string::npos);
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(NOISEGEN_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(Commands, ExecutableExitCodes) {
    const auto in = write_noisy("n.ppm", 64, 64);
    const std::string d = dir.string();
    EXPECT_EQ(run_cli("estimate " + in.string() + " " + d + "/m.nrg"), 0);
    EXPECT_EQ(run_cli("apply " + in.string() + " " + d + "/m.nrg " + d + "/o.png --seed 3 --psi 0.2"), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "o.png"));
    EXPECT_EQ(run_cli("estimate " + write_gray("t.ppm", 8, 8, 1).string() + " " + d + "/t.nrg"), 3);
    EXPECT_EQ(run_cli("apply " + in.string() + " " + in.string() + " " + d + "/o.png"), 4);
    EXPECT_EQ(run_cli("apply " + d + "/none.ppm " + d + "/m.nrg " + d + "/o.png"), 2);
    EXPECT_EQ(run_cli("roundtrip " + in.string() + " " + d + "/r.ppm --blur-sigma 0.8"), 0);
    EXPECT_EQ(run_cli("survey " + in.string()), 0);
    EXPECT_NE(run_cli("apply " + in.string() + " " + d + "/m.nrg " + d + "/o.png --psi 3"), 0);
}

} // namespace
} // namespace noisegen
