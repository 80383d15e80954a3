#ifndef NOISEGEN_IMAGE_IO_HPP
#define NOISEGEN_IMAGE_IO_HPP

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "noisegen/image.hpp"

namespace noisegen {

/// Interleaved 8-bit RGB, the on-disk representation.
struct Rgb8 {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temporary and renames it over `path`.
template <typename Writer>
void write_atomically(const std::filesystem::path& path, Writer&& writer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    try {
        writer(tmp);
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw;
    }
}

inline void write_file(const std::filesystem::path& path, const std::uint8_t* data, std::size_t size) {
    write_atomically(path, [&](const std::filesystem::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
        out.close();
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    });
}

namespace detail {

class PpmCursor {
public:
    explicit PpmCursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::size_t next_number() {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (++digits > 9) throw Error(ErrorCode::UnsupportedImage, "PPM header number too large");
        }
        if (digits == 0) throw Error(ErrorCode::UnsupportedImage, "malformed PPM header");
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw Error(ErrorCode::UnsupportedImage, "malformed PPM header");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

inline Rgb8 decode_ppm(const std::vector<std::uint8_t>& bytes) {
    PpmCursor cur(bytes);
    Rgb8 img;
    img.width = cur.next_number();
    img.height = cur.next_number();
    const std::size_t maxval = cur.next_number();
    if (maxval != 255) {
        throw Error(ErrorCode::UnsupportedImage, "PPM maxval " + std::to_string(maxval) + " (only 255 supported)");
    }
    if (img.width == 0 || img.height == 0) throw Error(ErrorCode::UnsupportedImage, "PPM has zero size");
    const std::size_t start = cur.raster_start();
    const std::size_t need = img.width * img.height * 3;
    if (bytes.size() < start + need) throw Error(ErrorCode::UnsupportedImage, "PPM raster truncated");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                      bytes.begin() + static_cast<std::ptrdiff_t>(start + need));
    return img;
}

inline Rgb8 decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw Error(ErrorCode::UnsupportedImage, std::string("PNG: ") + image.message);
    }
    std::string offender;
    if (image.format & PNG_FORMAT_FLAG_LINEAR) offender = "16-bit depth";
    else if (image.format & PNG_FORMAT_FLAG_COLORMAP) offender = "palette color type";
    else if (image.format & PNG_FORMAT_FLAG_ALPHA) offender = "alpha channel";
    if (!offender.empty()) {
        png_image_free(&image);
        throw Error(ErrorCode::UnsupportedImage, "PNG with " + offender + " is not supported");
    }
    image.format = PNG_FORMAT_RGB;
    Rgb8 img;
    img.width = image.width;
    img.height = image.height;
    img.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::UnsupportedImage, "PNG: " + msg);
    }
    return img;
}

inline bool has_extension(const std::filesystem::path& path, std::string_view ext) {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

} // namespace detail

/// Reads an 8-bit RGB PNG (grayscale is expanded) or a binary P6 PPM.
inline Rgb8 read_rgb8(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return detail::decode_ppm(bytes);
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return detail::decode_png(bytes);
    throw Error(ErrorCode::UnsupportedImage, path.string() + " is neither PNG nor binary PPM (P6)");
}

/// PNG for a .png extension, P6 PPM otherwise.
inline void write_rgb8(const Rgb8& img, const std::filesystem::path& path) {
    if (detail::has_extension(path, ".png")) {
        write_atomically(path, [&](const std::filesystem::path& tmp) {
            png_image image{};
            image.version = PNG_IMAGE_VERSION;
            image.width = static_cast<png_uint_32>(img.width);
            image.height = static_cast<png_uint_32>(img.height);
            image.format = PNG_FORMAT_RGB;
            if (!png_image_write_to_file(&image, tmp.c_str(), 0, img.pixels.data(), 0, nullptr)) {
                throw Error(ErrorCode::Io, std::string("PNG write failed: ") + image.message);
            }
        });
        return;
    }
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    write_file(path, out.data(), out.size());
}

inline PlanarImage to_planar(const Rgb8& img) {
    PlanarImage out(img.width, img.height, ColorSpace::RGB);
    for (std::size_t c = 0; c < 3; ++c) {
        auto dst = out.plane(c).values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = img.pixels[3 * i + c];
    }
    return out;
}

/// Rounds half up and clamps to [0,255].
inline Rgb8 to_rgb8(const PlanarImage& rgb) {
    require_space(rgb, ColorSpace::RGB, "to_rgb8");
    Rgb8 out{rgb.width(), rgb.height(), std::vector<std::uint8_t>(rgb.width() * rgb.height() * 3)};
    for (std::size_t c = 0; c < 3; ++c) {
        const auto src = rgb.plane(c).values();
        for (std::size_t i = 0; i < src.size(); ++i) {
            out.pixels[3 * i + c] = static_cast<std::uint8_t>(std::clamp(std::floor(src[i] + 0.5), 0.0, 255.0));
        }
    }
    return out;
}

inline PlanarImage load_image(const std::filesystem::path& path) { return to_planar(read_rgb8(path)); }

inline void save_image(const PlanarImage& rgb, const std::filesystem::path& path) { write_rgb8(to_rgb8(rgb), path); }

} // namespace noisegen

#endif
