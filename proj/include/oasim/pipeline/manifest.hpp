#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oasim/json_util.hpp"
#include "oasim/pipeline/sha256.hpp"

namespace oasim::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kLogFile = "log.json";
inline constexpr const char* kAnnotationsFile = "annotations.jsonl";

struct InputRef {
    std::string ref;
    std::string sha256;
    bool operator==(const InputRef&) const = default;
};

struct ArtifactEntry {
    std::string path;  // relative to the dataset root, '/' separated
    std::string sha256;
    std::uint64_t bytes = 0;
    bool operator==(const ArtifactEntry&) const = default;
};

struct CloudRef {
    std::string data;
    std::string header;
    bool operator==(const CloudRef&) const = default;
};

struct ManifestFrame {
    int index = 0;
    double time = 0.0;
    std::map<std::string, std::string> images;  // camera id -> rgb png
    std::map<std::string, std::string> depth;   // camera id -> depth png (optional)
    std::map<std::string, CloudRef> clouds;     // lidar id -> records + header
    std::string annotation;                     // jsonl file
    int annotation_line = 0;
    std::string pose;                           // frame index file holding the pose
    bool operator==(const ManifestFrame&) const = default;
};

struct DatasetManifest {
    std::string format = "oasim.manifest.v1";
    std::string job_id;
    std::string created_at;
    std::string generator_version;
    std::uint64_t seed = 0;
    double frame_rate = 0.0;
    double duration = 0.0;
    std::map<std::string, InputRef> inputs;  // scenario, scene, map, rig
    std::vector<ManifestFrame> frames;
    std::vector<ArtifactEntry> artifacts;  // sorted by path

    bool operator==(const DatasetManifest&) const = default;

    /// Every path a frame refers to.
    std::set<std::string> referenced_paths() const {
        std::set<std::string> out;
        for (const auto& f : frames) {
            for (const auto& [id, p] : f.images) out.insert(p);
            for (const auto& [id, p] : f.depth) out.insert(p);
            for (const auto& [id, c] : f.clouds) out.insert(c.data), out.insert(c.header);
            if (!f.annotation.empty()) out.insert(f.annotation);
            if (!f.pose.empty()) out.insert(f.pose);
        }
        return out;
    }
};

inline json manifest_json(const DatasetManifest& m) {
    json inputs = json::object();
    for (const auto& [k, r] : m.inputs) inputs[k] = {{"ref", r.ref}, {"sha256", r.sha256}};
    json frames = json::array();
    for (const auto& f : m.frames) {
        json clouds = json::object();
        for (const auto& [id, c] : f.clouds) clouds[id] = {{"data", c.data}, {"header", c.header}};
        json fj = {{"index", f.index},
                   {"time", f.time},
                   {"images", f.images},
                   {"clouds", clouds},
                   {"annotation", {{"path", f.annotation}, {"line", f.annotation_line}}},
                   {"pose", {{"path", f.pose}, {"frame", f.index}}}};
        if (!f.depth.empty()) fj["depth"] = f.depth;
        frames.push_back(std::move(fj));
    }
    json artifacts = json::array();
    for (const auto& a : m.artifacts) artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    return {{"format", m.format},
            {"job_id", m.job_id},
            {"created_at", m.created_at},
            {"generator_version", m.generator_version},
            {"seed", m.seed},
            {"frame_rate", m.frame_rate},
            {"duration", m.duration},
            {"inputs", inputs},
            {"frames", frames},
            {"artifacts", artifacts}};
}

inline DatasetManifest parse_manifest(const json& j) {
    DatasetManifest m;
    try {
        m.format = get_string(j, "format");
        if (m.format != "oasim.manifest.v1") fail("Format", "unsupported manifest format '" + m.format + "'");
        m.job_id = get_string(j, "job_id");
        m.created_at = get_string(j, "created_at");
        m.generator_version = get_string(j, "generator_version");
        m.seed = member(j, "seed").get<std::uint64_t>();
        m.frame_rate = get_number(j, "frame_rate");
        m.duration = get_number(j, "duration");
        for (const auto& [k, r] : member(j, "inputs").items()) m.inputs[k] = {get_string(r, "ref"), get_string(r, "sha256")};
        for (const auto& fj : member(j, "frames")) {
            ManifestFrame f;
            f.index = member(fj, "index").get<int>();
            f.time = get_number(fj, "time");
            f.images = member(fj, "images").get<std::map<std::string, std::string>>();
            if (fj.contains("depth")) f.depth = fj.at("depth").get<std::map<std::string, std::string>>();
            for (const auto& [id, c] : member(fj, "clouds").items()) f.clouds[id] = {get_string(c, "data"), get_string(c, "header")};
            f.annotation = get_string(member(fj, "annotation"), "path");
            f.annotation_line = member(member(fj, "annotation"), "line").get<int>();
            f.pose = get_string(member(fj, "pose"), "path");
            m.frames.push_back(std::move(f));
        }
        for (const auto& a : member(j, "artifacts"))
            m.artifacts.push_back({get_string(a, "path"), get_string(a, "sha256"), member(a, "bytes").get<std::uint64_t>()});
    } catch (const json::exception& e) {
        fail("Format", std::string("malformed manifest: ") + e.what());
    }
    return m;
}

inline std::string manifest_text(const DatasetManifest& m) { return manifest_json(m).dump(2) + "\n"; }

inline DatasetManifest load_manifest(const fs::path& path) { return parse_manifest(read_json_file(path)); }

/// Relative paths of every regular file under root except the manifest.
inline std::set<std::string> files_on_disk(const fs::path& root) {
    std::set<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), root).generic_string();
        if (rel != kManifestFile) out.insert(rel);
    }
    return out;
}

struct ManifestCheck {
    std::vector<std::string> missing;    // listed but absent
    std::vector<std::string> unlisted;   // on disk but not listed
    std::vector<std::string> mismatched; // hash or size differs
    std::vector<std::string> dangling;   // referenced by a frame but not an artifact

    bool ok() const { return missing.empty() && unlisted.empty() && mismatched.empty() && dangling.empty(); }
};

/// Completeness and hash verification of a dataset directory.
inline ManifestCheck verify_manifest(const DatasetManifest& m, const fs::path& root) {
    ManifestCheck c;
    std::set<std::string> listed;
    for (const auto& a : m.artifacts) {
        listed.insert(a.path);
        const fs::path p = root / a.path;
        if (!fs::is_regular_file(p)) {
            c.missing.push_back(a.path);
            continue;
        }
        const auto bytes = render::read_bytes(p);
        if (bytes.size() != a.bytes || sha256_hex(bytes) != a.sha256) c.mismatched.push_back(a.path);
    }
    for (const auto& f : files_on_disk(root))
        if (!listed.count(f)) c.unlisted.push_back(f);
    for (const auto& r : m.referenced_paths())
        if (!listed.count(r)) c.dangling.push_back(r);
    return c;
}

/// The manifest with job id and creation time blanked, for determinism
/// comparisons.
inline DatasetManifest without_job_identity(DatasetManifest m) {
    m.job_id.clear();
    m.created_at.clear();
    return m;
}

} // namespace oasim::pipeline
