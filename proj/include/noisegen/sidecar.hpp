#ifndef NOISEGEN_SIDECAR_HPP
#define NOISEGEN_SIDECAR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "noisegen/model_fit.hpp"

namespace noisegen {

// Layout (11 bytes):
//   0..3   magic "NRG1"
//   4      version (1)
//   5..6   alpha code, uint16 little-endian, uniform over [0, 4]
//   7..8   beta code,  uint16 little-endian, uniform over [0, 1]
//   9..10  gamma code, uint16 little-endian, uniform over [-8, 8]

inline constexpr std::size_t kSidecarSize = 11;
inline constexpr std::uint8_t kSidecarVersion = 1;
inline constexpr std::array<std::uint8_t, 4> kSidecarMagic{'N', 'R', 'G', '1'};

using Sidecar = std::array<std::uint8_t, kSidecarSize>;

struct QuantRange {
    double lo;
    double hi;

    double step() const { return (hi - lo) / 65535.0; }
};

inline constexpr QuantRange kAlphaRange{0.0, NoiseModel::kAlphaMax};
inline constexpr QuantRange kBetaRange{0.0, NoiseModel::kBetaMax};
inline constexpr QuantRange kGammaRange{NoiseModel::kGammaMin, NoiseModel::kGammaMax};

/// Round to nearest, ties up.
inline std::uint16_t quantize(double v, QuantRange r) {
    const double code = std::floor((v - r.lo) / (r.hi - r.lo) * 65535.0 + 0.5);
    return static_cast<std::uint16_t>(std::clamp(code, 0.0, 65535.0));
}

inline double dequantize(std::uint16_t code, QuantRange r) { return r.lo + code * (r.hi - r.lo) / 65535.0; }

inline Sidecar encode_sidecar(const NoiseModel& model) {
    if (!model.in_box()) {
        throw Error(ErrorCode::OutOfRange, "model parameters outside the quantization box");
    }
    Sidecar out{};
    std::copy(kSidecarMagic.begin(), kSidecarMagic.end(), out.begin());
    out[4] = kSidecarVersion;
    const std::array<std::uint16_t, 3> codes{quantize(model.alpha, kAlphaRange), quantize(model.beta, kBetaRange),
                                             quantize(model.gamma, kGammaRange)};
    for (std::size_t i = 0; i < 3; ++i) {
        out[5 + 2 * i] = static_cast<std::uint8_t>(codes[i] & 0xFF);
        out[6 + 2 * i] = static_cast<std::uint8_t>(codes[i] >> 8);
    }
    return out;
}

inline NoiseModel decode_sidecar(std::span<const std::uint8_t> bytes) {
    const std::size_t magic_len = std::min(bytes.size(), kSidecarMagic.size());
    if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(magic_len), kSidecarMagic.begin())) {
        throw Error(ErrorCode::BadMagic, "sidecar does not start with NRG1");
    }
    if (bytes.size() < 5) {
        throw Error(ErrorCode::TruncatedSidecar, "sidecar has no version byte");
    }
    if (bytes[4] != kSidecarVersion) {
        throw Error(ErrorCode::BadVersion, "unsupported sidecar version " + std::to_string(bytes[4]));
    }
    if (bytes.size() < kSidecarSize) {
        throw Error(ErrorCode::TruncatedSidecar,
                    "sidecar is " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(kSidecarSize));
    }
    auto code = [&](std::size_t i) {
        return static_cast<std::uint16_t>(bytes[5 + 2 * i] | (bytes[6 + 2 * i] << 8));
    };
    return {dequantize(code(0), kAlphaRange), dequantize(code(1), kBetaRange), dequantize(code(2), kGammaRange)};
}

} // namespace noisegen

#endif
