#ifndef NOISEGEN_MODEL_FIT_HPP
#define NOISEGEN_MODEL_FIT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisegen/image.hpp"

namespace noisegen {

/// Intensities below this are clamped before evaluating i^gamma.
inline constexpr double kIntensityFloor = 1e-3;
inline constexpr std::size_t kMinSamples = 16;

/// n(i) = alpha * i^gamma + beta, with i the gamma-corrected L' intensity.
struct NoiseModel {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 1.0;

    static constexpr double kAlphaMax = 4.0;
    static constexpr double kBetaMax = 1.0;
    static constexpr double kGammaMin = -8.0;
    static constexpr double kGammaMax = 8.0;

    /// Adds no noise at all.
    static constexpr NoiseModel null() { return {0.0, 0.0, 1.0}; }

    bool in_box() const noexcept {
        return alpha >= 0.0 && alpha <= kAlphaMax && beta >= 0.0 && beta <= kBetaMax && gamma >= kGammaMin &&
               gamma <= kGammaMax;
    }

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

inline NoiseModel project_to_box(NoiseModel m) {
    m.alpha = std::clamp(m.alpha, 0.0, NoiseModel::kAlphaMax);
    m.beta = std::clamp(m.beta, 0.0, NoiseModel::kBetaMax);
    m.gamma = std::clamp(m.gamma, NoiseModel::kGammaMin, NoiseModel::kGammaMax);
    return m;
}

inline double clamp_intensity(double i) { return std::clamp(i, kIntensityFloor, 1.0); }

/// Predicted noise level at intensity `i`; never negative.
inline double predict(const NoiseModel& model, double i) {
    return std::max(0.0, model.alpha * std::pow(clamp_intensity(i), model.gamma) + model.beta);
}

/// One homogeneous patch: its mean L' intensity and its measured noise level.
struct Sample {
    double intensity = 0.0;
    double level = 0.0;
};

using TrainingSet = std::vector<Sample>;

inline double mean_intensity(const Plane& plane, PatchAnchor patch) {
    double sum = 0.0;
    for (std::size_t y = patch.y0; y < patch.y0 + kPatchSize; ++y) {
        for (std::size_t x = patch.x0; x < patch.x0 + kPatchSize; ++x) sum += plane(x, y);
    }
    return sum / static_cast<double>(kPatchPixels);
}

struct FitConfig {
    double xi = 5e-5;
    int max_iterations = 200;
    double grad_tolerance = 1e-8;
    /// Starting point; derived from the samples when empty.
    std::optional<NoiseModel> init;
};

/// Sum of squared residuals plus the xi * alpha * gamma penalty, which favors
/// decreasing curves.
inline double objective(const NoiseModel& m, std::span<const Sample> ts, double xi) {
    double sum = 0.0;
    for (const Sample& s : ts) {
        const double e = s.level - (m.alpha * std::pow(clamp_intensity(s.intensity), m.gamma) + m.beta);
        sum += e * e;
    }
    return sum + xi * m.alpha * m.gamma;
}

struct Gradient {
    double d_alpha = 0.0;
    double d_beta = 0.0;
    double d_gamma = 0.0;
};

inline Gradient objective_gradient(const NoiseModel& m, std::span<const Sample> ts, double xi) {
    Gradient g;
    for (const Sample& s : ts) {
        const double i = clamp_intensity(s.intensity);
        const double p = std::pow(i, m.gamma);
        const double e = s.level - (m.alpha * p + m.beta);
        g.d_alpha += -2.0 * e * p;
        g.d_beta += -2.0 * e;
        g.d_gamma += -2.0 * e * m.alpha * p * std::log(i);
    }
    g.d_alpha += xi * m.gamma;
    g.d_gamma += xi * m.alpha;
    return g;
}

inline NoiseModel default_init(std::span<const Sample> ts) {
    double sum = 0.0;
    double lowest = ts.empty() ? 0.0 : ts.front().level;
    for (const Sample& s : ts) {
        sum += s.level;
        lowest = std::min(lowest, s.level);
    }
    const double mean = ts.empty() ? 0.0 : sum / static_cast<double>(ts.size());
    return project_to_box({std::max(1e-3, mean), lowest, -0.5});
}

namespace detail {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

inline Vec3 to_vec(const NoiseModel& m) { return {m.alpha, m.beta, m.gamma}; }
inline NoiseModel to_model(const Vec3& v) { return {v[0], v[1], v[2]}; }

inline constexpr Vec3 kLower{0.0, 0.0, NoiseModel::kGammaMin};
inline constexpr Vec3 kUpper{NoiseModel::kAlphaMax, NoiseModel::kBetaMax, NoiseModel::kGammaMax};

/// Solves A x = b for the symmetric positive definite leading `n` x `n` block.
/// Returns false if the Cholesky factorization breaks down.
inline bool cholesky_solve(Mat3 a, Vec3 b, std::size_t n, Vec3& x) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
        if (!(d > 0.0)) return false;
        a[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i][j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i][k] * a[j][k];
            a[i][j] = v / a[j][j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i][k] * b[k];
        b[i] = v / a[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= a[k][i] * b[k];
        b[i] = v / a[i][i];
    }
    x = b;
    return true;
}

} // namespace detail

struct FitResult {
    NoiseModel model;
    int iterations = 0;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    double projected_gradient_norm = 0.0;
    bool converged = false;
};

/// Box-constrained least-squares fit of the noise model.
///
/// Projected Levenberg-Marquardt: Gauss-Newton curvature of the data term,
/// variables pinned at a bound by an outward gradient are frozen for the step,
/// and a step is accepted only if it lowers the objective.
namespace detail {

/// Projected Levenberg-Marquardt descent from a single starting point.
inline FitResult descend(std::span<const Sample> ts, const FitConfig& cfg, const NoiseModel& start) {
    Vec3 x = to_vec(project_to_box(start));
    double f = objective(to_model(x), ts, cfg.xi);

    FitResult result;
    result.initial_objective = f;
    double lambda = 1e-3;

    for (; result.iterations < cfg.max_iterations; ++result.iterations) {
        const NoiseModel m = to_model(x);
        const Gradient gr = objective_gradient(m, ts, cfg.xi);
        const Vec3 g{gr.d_alpha, gr.d_beta, gr.d_gamma};

        Mat3 h{};
        for (const Sample& s : ts) {
            const double i = clamp_intensity(s.intensity);
            const double p = std::pow(i, m.gamma);
            const Vec3 jac{p, 1.0, m.alpha * p * std::log(i)};
            for (std::size_t r = 0; r < 3; ++r) {
                for (std::size_t c = 0; c < 3; ++c) h[r][c] += 2.0 * jac[r] * jac[c];
            }
        }

        std::array<std::size_t, 3> free{};
        std::size_t n_free = 0;
        double pg_norm2 = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const bool pinned = (x[k] <= kLower[k] && g[k] > 0.0) || (x[k] >= kUpper[k] && g[k] < 0.0);
            if (!pinned) {
                free[n_free++] = k;
                pg_norm2 += g[k] * g[k];
            }
        }
        result.projected_gradient_norm = std::sqrt(pg_norm2);
        if (result.projected_gradient_norm <= cfg.grad_tolerance) {
            result.converged = true;
            break;
        }

        double diag_max = 0.0;
        for (std::size_t a = 0; a < n_free; ++a) diag_max = std::max(diag_max, h[free[a]][free[a]]);
        const double diag_floor = 1e-12 * std::max(1.0, diag_max);

        bool accepted = false;
        while (lambda < 1e16) {
            Mat3 a{};
            Vec3 b{};
            for (std::size_t r = 0; r < n_free; ++r) {
                for (std::size_t c = 0; c < n_free; ++c) a[r][c] = h[free[r]][free[c]];
                a[r][r] += lambda * std::max(h[free[r]][free[r]], diag_floor);
                b[r] = -g[free[r]];
            }
            Vec3 step{};
            if (!cholesky_solve(a, b, n_free, step)) {
                lambda *= 10.0;
                continue;
            }
            Vec3 candidate = x;
            for (std::size_t r = 0; r < n_free; ++r) {
                const std::size_t k = free[r];
                candidate[k] = std::clamp(x[k] + step[r], kLower[k], kUpper[k]);
            }
            const double f_new = objective(to_model(candidate), ts, cfg.xi);
            if (std::isfinite(f_new) && f_new < f) {
                x = candidate;
                f = f_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // No representable descent step left.
            result.converged = true;
            break;
        }
    }

    result.model = to_model(x);
    result.final_objective = f;
    return result;
}

} // namespace detail

/// Fits the model to `ts`. Without an explicit init, the default start is
/// followed by a few restarts at other exponents: once alpha reaches zero the
/// exponent has no gradient, so a start on the wrong side of gamma = 0 can
/// stall on a flat curve. The lowest objective wins; `initial_objective`
/// always refers to the first start, `iterations` to the winning one.
inline FitResult fit_detailed(std::span<const Sample> ts, const FitConfig& cfg = {}) {
    if (ts.size() < kMinSamples) {
        throw Error(ErrorCode::InsufficientSamples,
                    std::to_string(ts.size()) + " samples, need at least " + std::to_string(kMinSamples));
    }
    if (cfg.init) return detail::descend(ts, cfg, *cfg.init);

    const NoiseModel base = default_init(ts);
    FitResult best = detail::descend(ts, cfg, base);
    const double initial = best.initial_objective;
    for (double gamma : {0.5, -2.0, 2.0}) {
        FitResult r = detail::descend(ts, cfg, {base.alpha, base.beta, gamma});
        if (r.final_objective < best.final_objective) best = r;
    }
    best.initial_objective = initial;
    return best;
}

inline NoiseModel fit(std::span<const Sample> ts, const FitConfig& cfg = {}) { return fit_detailed(ts, cfg).model; }

/// Like fit(), but too few samples yield the null model instead of an error.
inline NoiseModel fit_or_null(std::span<const Sample> ts, const FitConfig& cfg = {}) {
    if (ts.size() < kMinSamples) return NoiseModel::null();
    return fit(ts, cfg);
}

} // namespace noisegen

#endif
