#pragma once

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "monostereo/errors.hpp"
#include "monostereo/image.hpp"

namespace monostereo::io {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace detail

/// Writes a [0,1] grayscale image as an 8- or 16-bit PNG. Values are clamped
/// and quantized to the full integer range.
inline void write_png_gray(const std::string& path, const ImageGray& img, int bit_depth = 16) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::runtime_error("write_png_gray: bit depth must be 8 or 16");
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("write_png_gray: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png_gray: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png_gray: libpng error writing " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width(), img.height(), bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const double maxv = bit_depth == 8 ? 255.0 : 65535.0;
    std::vector<uint8_t> row(static_cast<size_t>(img.width()) * (bit_depth / 8));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double v = std::clamp(static_cast<double>(img.at(x, y)), 0.0, 1.0);
            const auto q = static_cast<uint32_t>(std::lround(v * maxv));
            if (bit_depth == 8) {
                row[x] = static_cast<uint8_t>(q);
            } else {
                row[2 * x] = static_cast<uint8_t>(q >> 8); // PNG stores 16-bit big-endian
                row[2 * x + 1] = static_cast<uint8_t>(q & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

/// Reads an 8- or 16-bit grayscale PNG back to [0,1] floats. Color inputs
/// are rejected; this loader only speaks the formats the pipeline writes.
inline ImageGray read_png_gray(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("read_png_gray: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png_gray: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw MalformedHeader("read_png_gray: libpng error reading " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw MalformedHeader("read_png_gray: " + path + " is not 8/16-bit grayscale");
    }
    png_read_update_info(png, info);

    ImageGray img(w, h);
    const double maxv = depth == 8 ? 255.0 : 65535.0;
    std::vector<uint8_t> row(png_get_rowbytes(png, info));
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) {
            uint32_t q = depth == 8 ? row[x]
                                    : (static_cast<uint32_t>(row[2 * x]) << 8) | row[2 * x + 1];
            img.at(x, y) = static_cast<float>(q / maxv);
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

} // namespace monostereo::io
