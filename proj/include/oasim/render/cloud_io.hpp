#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include "oasim/json_util.hpp"
#include "oasim/render/frame.hpp"
#include "oasim/render/image_io.hpp"

namespace oasim::render {

/// Record layout: float32 x, y, z, range; uint16 ring, instance; float64
/// timestamp. Little-endian, packed, 28 bytes.
inline constexpr std::size_t kCloudRecordBytes = 28;

namespace detail {

template <class T>
void put_le(Bytes& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::uint8_t* p) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    return std::bit_cast<T>(bits);
}

} // namespace detail

inline Bytes encode_cloud(const PointCloud& c) {
    Bytes out;
    out.reserve(c.points.size() * kCloudRecordBytes);
    for (const auto& p : c.points) {
        detail::put_le(out, static_cast<float>(p.xyz.x));
        detail::put_le(out, static_cast<float>(p.xyz.y));
        detail::put_le(out, static_cast<float>(p.xyz.z));
        detail::put_le(out, static_cast<float>(p.range));
        detail::put_le(out, p.ring);
        detail::put_le(out, p.instance);
        detail::put_le(out, p.timestamp);
    }
    return out;
}

inline json cloud_header(const PointCloud& c, const std::string& sensor_id, const std::string& data_file) {
    return {{"format", "oasim.pointcloud.v1"},
            {"sensor", sensor_id},
            {"data", data_file},
            {"count", c.points.size()},
            {"record_bytes", kCloudRecordBytes},
            {"fields", json::array({"x:f32", "y:f32", "z:f32", "range:f32", "ring:u16", "instance:u16", "timestamp:f64"})},
            {"frame", "sensor at sweep start"},
            {"t0", c.t0},
            {"spin_period", c.spin_period},
            {"max_range", c.max_range},
            {"beams", c.beams}};
}

/// Decodes records; values come back at float32 precision (timestamps exact).
inline PointCloud decode_cloud(const Bytes& data, const json& header) {
    if (data.size() % kCloudRecordBytes != 0) fail("Format", "cloud data is not a whole number of records");
    PointCloud c;
    c.t0 = get_number(header, "t0");
    c.spin_period = get_number(header, "spin_period");
    c.max_range = get_number(header, "max_range");
    c.beams = member(header, "beams").get<int>();
    const std::size_t n = data.size() / kCloudRecordBytes;
    if (member(header, "count").get<std::size_t>() != n) fail("Format", "cloud header count does not match data");
    c.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* r = data.data() + i * kCloudRecordBytes;
        auto& p = c.points[i];
        p.xyz = {detail::get_le<float>(r), detail::get_le<float>(r + 4), detail::get_le<float>(r + 8)};
        p.range = detail::get_le<float>(r + 12);
        p.ring = detail::get_le<std::uint16_t>(r + 16);
        p.instance = detail::get_le<std::uint16_t>(r + 18);
        p.timestamp = detail::get_le<double>(r + 20);
    }
    return c;
}

} // namespace oasim::render
