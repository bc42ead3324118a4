#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/render/frame.hpp"

namespace oasim::render {

using Bytes = std::vector<std::uint8_t>;

namespace detail {

inline void png_append(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

inline void png_flush(png_structp) {}

/// Encodes 8-bit RGB (channels = 3) or 16-bit gray (channels = 1) rows.
/// Fixed compression settings and no timestamp chunk, so output is a pure
/// function of the pixels.
inline Bytes encode_png(int width, int height, int channels, int bit_depth, const std::vector<std::uint8_t>& raw) {
    Bytes out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail("IoError", "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail("IoError", "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("IoError", "PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_append, png_flush);
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_SUB);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
    for (int y = 0; y < height; ++y) png_write_row(png, const_cast<png_bytep>(raw.data() + static_cast<std::size_t>(y) * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace detail

inline std::uint8_t to_u8(double c) { return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }

inline Bytes encode_rgb_png(const RenderFrame& f) {
    std::vector<std::uint8_t> raw(f.size() * 3);
    for (std::size_t i = 0; i < f.size(); ++i) {
        raw[3 * i] = to_u8(f.rgb[i].x);
        raw[3 * i + 1] = to_u8(f.rgb[i].y);
        raw[3 * i + 2] = to_u8(f.rgb[i].z);
    }
    return detail::encode_png(f.width, f.height, 3, 8, raw);
}

/// Depth in millimeters, 16-bit; 0 marks pixels without a hit. Valid
/// depths are clamped to [1, 65535] mm.
inline std::uint16_t depth_to_mm(double depth) {
    if (!std::isfinite(depth)) return 0;
    return static_cast<std::uint16_t>(std::clamp<long long>(std::llround(depth * 1000.0), 1, 65535));
}

inline Bytes encode_depth_png(const RenderFrame& f) {
    std::vector<std::uint8_t> raw(f.size() * 2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::uint16_t mm = depth_to_mm(f.depth[i]);
        raw[2 * i] = static_cast<std::uint8_t>(mm >> 8);  // PNG is big-endian
        raw[2 * i + 1] = static_cast<std::uint8_t>(mm & 0xff);
    }
    return detail::encode_png(f.width, f.height, 1, 16, raw);
}

inline void write_bytes(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("IoError", "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail("IoError", "short write to '" + path.string() + "'");
}

inline Bytes read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("NotFound", "cannot open '" + path.string() + "'");
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace oasim::render
