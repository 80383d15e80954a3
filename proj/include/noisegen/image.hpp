#ifndef NOISEGEN_IMAGE_HPP
#define NOISEGEN_IMAGE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace noisegen {

enum class ErrorCode {
    OutOfRange,
    SpaceMismatch,
    DimensionMismatch,
    DegenerateConstants,
    DegenerateImage,
    EmptySelection,
    MarginUnavailable,
    InsufficientSamples,
    DegenerateMatrix,
    BadMagic,
    BadVersion,
    TruncatedSidecar,
    UnsupportedImage,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateConstants: return "DegenerateConstants";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::MarginUnavailable: return "MarginUnavailable";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::TruncatedSidecar: return "TruncatedSidecar";
    case ErrorCode::UnsupportedImage: return "UnsupportedImage";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// All library failures are reported through this exception; `code()` says which.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Row-major matrix of samples. Used both for image planes and for noise matrices.
class Plane {
public:
    Plane() = default;
    Plane(std::size_t width, std::size_t height, double fill = 0.0)
        : width_(width), height_(height), data_(width * height, fill) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    std::span<double> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
    std::span<const double> row(std::size_t y) const { return {data_.data() + y * width_, width_}; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const Plane& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
};

enum class ColorSpace { RGB, GLMS, XYB };

inline const char* to_string(ColorSpace space) {
    switch (space) {
    case ColorSpace::RGB: return "RGB";
    case ColorSpace::GLMS: return "GLMS";
    case ColorSpace::XYB: return "XYB";
    }
    return "?";
}

/// Three equally sized planes tagged with the color space they are expressed in.
///
/// Channel order is (R, G, B), (L', M', S') or (X, Y, B) depending on `space()`.
class PlanarImage {
public:
    PlanarImage() = default;
    PlanarImage(std::size_t width, std::size_t height, ColorSpace space)
        : space_(space), planes_{Plane(width, height), Plane(width, height), Plane(width, height)} {
        if (width == 0 || height == 0) {
            throw Error(ErrorCode::DegenerateImage, "image must be at least 1x1");
        }
    }
    PlanarImage(std::array<Plane, 3> planes, ColorSpace space) : space_(space), planes_(std::move(planes)) {
        if (!planes_[0].same_shape(planes_[1]) || !planes_[0].same_shape(planes_[2])) {
            throw Error(ErrorCode::DimensionMismatch, "planes differ in size");
        }
        if (planes_[0].width() == 0 || planes_[0].height() == 0) {
            throw Error(ErrorCode::DegenerateImage, "image must be at least 1x1");
        }
    }

    std::size_t width() const noexcept { return planes_[0].width(); }
    std::size_t height() const noexcept { return planes_[0].height(); }
    ColorSpace space() const noexcept { return space_; }

    Plane& plane(std::size_t c) { return planes_[c]; }
    const Plane& plane(std::size_t c) const { return planes_[c]; }

    friend bool operator==(const PlanarImage&, const PlanarImage&) = default;

private:
    ColorSpace space_ = ColorSpace::RGB;
    std::array<Plane, 3> planes_;
};

inline void require_space(const PlanarImage& img, ColorSpace expected, const char* op) {
    if (img.space() != expected) {
        throw Error(ErrorCode::SpaceMismatch, std::string(op) + " expects " + to_string(expected) +
                                                  " input, got " + to_string(img.space()));
    }
}

inline bool all_finite(const PlanarImage& img) {
    for (std::size_t c = 0; c < 3; ++c) {
        for (double v : img.plane(c).values()) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

/// Top-left corner of a square patch.
struct PatchAnchor {
    std::size_t x0 = 0;
    std::size_t y0 = 0;

    friend bool operator==(const PatchAnchor&, const PatchAnchor&) = default;
};

inline constexpr std::size_t kPatchSize = 8;
inline constexpr std::size_t kPatchPixels = kPatchSize * kPatchSize;

} // namespace noisegen

#endif
