#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "oasim/json_util.hpp"
#include "oasim/scene/scene.hpp"

namespace oasim::scene {

/// Everything a scene.json describes, before composition.
struct SceneDescription {
    SdfField background;
    AlbedoMap background_albedo;
    AssetLibrary assets;
    std::vector<Placement> placements;
    std::vector<std::string> traffic_assets;  // default traffic pool; empty means every asset

    SceneSnapshot compose_with(const std::vector<Placement>& extra = {}) const {
        std::vector<Placement> all = placements;
        all.insert(all.end(), extra.begin(), extra.end());
        return compose(background, background_albedo, assets, all);
    }
};

/// Reads little-endian float32 values in x-fastest order.
inline std::vector<float> read_grid_values(const std::filesystem::path& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("NotFound", "cannot open grid file '" + path.string() + "'");
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() != count * 4)
        fail("Invalid", "grid file '" + path.string() + "' holds " + std::to_string(raw.size()) + " bytes, expected " + std::to_string(count * 4));
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) | (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                             (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) | (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

inline void write_grid_values(const std::filesystem::path& path, const std::vector<float>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot write grid file '" + path.string() + "'");
    for (float v : values) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
        out.write(b, 4);
    }
}

inline Primitive parse_primitive(const json& j) {
    const std::string type = get_string(j, "type");
    if (type == "plane") {
        const Vec3 n = get_vec3(j, "normal");
        if (!(norm(n) > 0.0)) fail("Invalid", "plane normal must be non-zero");
        const double scale = norm(n);
        // offset is given for the normal as written
        return Plane{n / scale, get_number(j, "offset") / scale};
    }
    if (type == "sphere") return Sphere{get_vec3(j, "center"), get_number(j, "radius")};
    if (type == "box") return Box{get_vec3(j, "center"), get_vec3(j, "half_extents")};
    if (type == "rounded_box") return RoundedBox{get_vec3(j, "center"), get_vec3(j, "half_extents"), get_number(j, "radius")};
    if (type == "capsule") return Capsule{get_vec3(j, "a"), get_vec3(j, "b"), get_number(j, "radius")};
    fail("Format", "unknown primitive type '" + type + "'");
}

/// Parses a field document. Grid files are resolved relative to `base_dir`.
inline SdfField parse_field(const json& j, const std::filesystem::path& base_dir) {
    const std::string type = get_string(j, "type");
    if (type == "union") {
        PrimitiveUnion u;
        const json& parts = member(j, "primitives");
        if (!parts.is_array()) fail("Format", "union primitives must be an array");
        for (const auto& p : parts) u.parts.push_back(parse_primitive(p));
        return SdfField(std::move(u));
    }
    if (type == "grid") {
        SampledGrid g;
        g.origin = get_vec3(j, "origin");
        g.cell = get_number(j, "cell");
        const json& dims = member(j, "dims");
        if (!dims.is_array() || dims.size() != 3) fail("Format", "grid dims must be [nx,ny,nz]");
        for (int a = 0; a < 3; ++a) {
            if (!dims[a].is_number_integer()) fail("Format", "grid dims must be integers");
            g.dims[a] = dims[a].get<int>();
            if (g.dims[a] < 2) fail("Invalid", "grid dims must be >= 2 on every axis");
        }
        const std::size_t n = static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2];
        g.values = read_grid_values(base_dir / get_string(j, "file"), n);
        return SdfField(std::move(g));
    }
    return SdfField(parse_primitive(j));
}

inline json primitive_json(const Primitive& prim) {
    struct Visitor {
        json operator()(const Plane& s) const { return {{"type", "plane"}, {"normal", vec3_json(s.normal)}, {"offset", s.offset}}; }
        json operator()(const Sphere& s) const { return {{"type", "sphere"}, {"center", vec3_json(s.center)}, {"radius", s.radius}}; }
        json operator()(const Box& s) const {
            return {{"type", "box"}, {"center", vec3_json(s.center)}, {"half_extents", vec3_json(s.half_extents)}};
        }
        json operator()(const RoundedBox& s) const {
            return {{"type", "rounded_box"}, {"center", vec3_json(s.center)}, {"half_extents", vec3_json(s.half_extents)}, {"radius", s.radius}};
        }
        json operator()(const Capsule& s) const {
            return {{"type", "capsule"}, {"a", vec3_json(s.a)}, {"b", vec3_json(s.b)}, {"radius", s.radius}};
        }
    };
    return std::visit(Visitor{}, prim);
}

inline AlbedoMap parse_albedo(const json& j) {
    AlbedoMap m;
    if (j.contains("constant")) m.constant = to_vec3(j.at("constant"));
    if (j.contains("bands")) {
        for (const auto& b : j.at("bands")) m.bands.push_back({get_number(b, "z_max"), get_vec3(b, "rgb")});
    }
    return m;
}

inline SceneDescription parse_scene(const json& doc, const std::filesystem::path& base_dir) {
    SceneDescription d;
    d.background = parse_field(member(doc, "background"), base_dir);
    if (doc.contains("background_albedo")) d.background_albedo = parse_albedo(doc.at("background_albedo"));
    if (doc.contains("assets")) {
        for (const auto& a : doc.at("assets")) {
            auto asset = std::make_shared<Asset>();
            asset->id = get_string(a, "id");
            asset->cls = parse_vehicle_class(get_string(a, "class"));
            asset->shape = parse_field(member(a, "shape"), base_dir);
            asset->size = get_vec3(a, "bbox");
            if (a.contains("albedo")) asset->albedo = to_vec3(a.at("albedo"));
            validate_asset(*asset);
            if (!d.assets.emplace(asset->id, asset).second) fail("Invalid", "duplicate asset id '" + asset->id + "'");
        }
    }
    if (doc.contains("instances")) {
        for (const auto& i : doc.at("instances")) d.placements.push_back({get_string(i, "asset"), to_pose(i)});
    }
    if (doc.contains("traffic_assets")) {
        for (const auto& id : doc.at("traffic_assets")) {
            d.traffic_assets.push_back(id.get<std::string>());
            if (!d.assets.count(d.traffic_assets.back())) fail("UnknownAsset", "traffic asset '" + d.traffic_assets.back() + "' is not in the library");
        }
    }
    // resolve early so a bad scene file fails at load
    (void)d.compose_with();
    return d;
}

inline SceneDescription load_scene(const std::filesystem::path& path) {
    return parse_scene(read_json_file(path), path.parent_path());
}

} // namespace oasim::scene
