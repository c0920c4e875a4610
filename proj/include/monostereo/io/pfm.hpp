#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "monostereo/errors.hpp"
#include "monostereo/image.hpp"

namespace monostereo::io {

/// PFM, grayscale flavor ("Pf"): text header `Pf\n<w> <h>\n<scale>\n`, then
/// w*h float32 samples in bottom-up row order. A negative scale marks a
/// little-endian payload. Invalid pixels are stored as +inf.
inline constexpr float kPfmInvalid = std::numeric_limits<float>::infinity();

namespace detail {

inline bool host_is_little_endian() { return std::endian::native == std::endian::little; }

inline std::string next_token(std::istream& in) {
    std::string tok;
    in >> tok;
    return tok;
}

inline void byteswap4(char* p) {
    std::swap(p[0], p[3]);
    std::swap(p[1], p[2]);
}

} // namespace detail

/// Writes data bottom-up as float32 with the host's endianness declared in
/// the scale sign. Invalid pixels become +inf.
inline void write_pfm(const std::string& path, const Raster<double>& data, const Mask& valid) {
    require_same_size(data, valid, "write_pfm data/mask");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pfm: cannot open " + path);
    const double scale = detail::host_is_little_endian() ? -1.0 : 1.0;
    out << "Pf\n" << data.width() << " " << data.height() << "\n" << scale << "\n";
    std::vector<float> row(static_cast<size_t>(data.width()));
    for (int y = data.height() - 1; y >= 0; --y) {
        for (int x = 0; x < data.width(); ++x)
            row[x] = valid.at(x, y) ? static_cast<float>(data.at(x, y)) : kPfmInvalid;
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("write_pfm: write failed for " + path);
}

inline void write_pfm(const std::string& path, const MaskedMap& map) {
    write_pfm(path, map.data, map.valid);
}

/// Reads a grayscale PFM into data + validity mask. +inf (and NaN) samples
/// are reported as invalid pixels. Throws MalformedHeader / TruncatedPayload.
inline void read_pfm(const std::string& path, Raster<double>& data, Mask& valid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pfm: cannot open " + path);

    const std::string magic = detail::next_token(in);
    if (magic != "Pf")
        throw MalformedHeader("read_pfm: expected Pf header in " + path + ", got '" + magic + "'");
    int w = 0, h = 0;
    double scale = 0.0;
    if (!(in >> w >> h >> scale) || w <= 0 || h <= 0)
        throw MalformedHeader("read_pfm: bad dimensions in " + path);
    if (scale == 0.0) throw MalformedHeader("read_pfm: zero scale in " + path);
    in.get(); // single whitespace byte separating header and payload

    const bool file_little = scale < 0.0;
    data = Raster<double>(w, h);
    valid = Mask(w, h, 0);
    std::vector<char> row(static_cast<size_t>(w) * sizeof(float));
    for (int y = h - 1; y >= 0; --y) {
        in.read(row.data(), static_cast<std::streamsize>(row.size()));
        if (in.gcount() != static_cast<std::streamsize>(row.size()))
            throw TruncatedPayload("read_pfm: payload ends early in " + path);
        for (int x = 0; x < w; ++x) {
            char bytes[4];
            std::memcpy(bytes, row.data() + static_cast<size_t>(x) * 4, 4);
            if (file_little != detail::host_is_little_endian()) detail::byteswap4(bytes);
            float f;
            std::memcpy(&f, bytes, 4);
            if (std::isfinite(f)) {
                data.at(x, y) = f;
                valid.at(x, y) = 1;
            }
        }
    }
}

inline DisparityMap read_pfm_disparity(const std::string& path) {
    DisparityMap map;
    read_pfm(path, map.data, map.valid);
    return map;
}

inline DepthMap read_pfm_depth(const std::string& path) {
    DepthMap map;
    read_pfm(path, map.data, map.valid);
    return map;
}

} // namespace monostereo::io
