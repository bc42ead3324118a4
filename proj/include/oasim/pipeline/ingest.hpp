#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/json_util.hpp"
#include "oasim/pipeline/manifest.hpp"
#include "oasim/sensors/rig.hpp"

namespace oasim::pipeline {

struct LogFrame {
    int index = 0;
    double time = 0.0;
    Pose pose;
    std::map<std::string, std::string> images;  // camera id -> path
    std::map<std::string, std::string> clouds;  // lidar id -> path
};

struct LogMetadata {
    std::string source;
    int frame_count = 0;
    double duration = 0.0;
};

struct UnifiedLog {
    std::vector<LogFrame> frames;
    sensors::SensorRig rig;
    LogMetadata metadata;
};

struct Finding {
    enum class Severity { error, warn };
    Severity severity = Severity::error;
    std::string code;
    int frame = -1;  // -1: not tied to a frame
    std::string message;
};

struct IntegrityReport {
    std::vector<Finding> findings;

    bool pass() const {
        for (const auto& f : findings)
            if (f.severity == Finding::Severity::error) return false;
        return true;
    }
    std::size_t count(const std::string& code) const {
        std::size_t n = 0;
        for (const auto& f : findings) n += f.code == code;
        return n;
    }
    const Finding* first(const std::string& code) const {
        for (const auto& f : findings)
            if (f.code == code) return &f;
        return nullptr;
    }
};

inline json report_json(const IntegrityReport& r) {
    json findings = json::array();
    for (const auto& f : r.findings)
        findings.push_back({{"severity", f.severity == Finding::Severity::error ? "error" : "warn"},
                            {"code", f.code},
                            {"frame", f.frame},
                            {"message", f.message}});
    return {{"pass", r.pass()}, {"findings", findings}};
}

namespace detail {

inline bool pose_finite(const Pose& p) {
    return std::isfinite(p.translation.x) && std::isfinite(p.translation.y) && std::isfinite(p.translation.z) &&
           std::isfinite(p.rotation.w) && std::isfinite(p.rotation.x) && std::isfinite(p.rotation.y) && std::isfinite(p.rotation.z);
}

/// Cloud header sidecar: same stem, .json.
inline std::string cloud_header_path(const std::string& data) {
    return fs::path(data).replace_extension(".json").generic_string();
}

inline std::map<std::string, std::string> read_refs(const json& j, const char* key) {
    std::map<std::string, std::string> out;
    if (!j.contains(key)) return out;
    for (const auto& [id, p] : j.at(key).items()) out[id] = p.get<std::string>();
    return out;
}

} // namespace detail

/// Reads `dir/log.json` into a unified log and checks it: strictly
/// increasing time, one reference per rig sensor per frame, calibration
/// for every sensor, and existence of every referenced file. `rig`
/// overrides the rig stored in the log. Only an unreadable directory or
/// index throws (Unreadable); everything else becomes a finding.
inline std::pair<UnifiedLog, IntegrityReport> ingest(const fs::path& dir, const std::optional<sensors::SensorRig>& rig = std::nullopt) {
    if (!fs::is_directory(dir)) fail("Unreadable", "input directory '" + dir.string() + "' does not exist");
    const fs::path index = dir / kLogFile;
    if (!fs::is_regular_file(index)) fail("Unreadable", "frame index '" + index.string() + "' is missing");
    json doc;
    try {
        doc = read_json_file(index, "Unreadable");
    } catch (const Error& e) {
        fail("Unreadable", e.what());
    }
    if (!doc.is_object() || !doc.contains("frames") || !doc.at("frames").is_array())
        fail("Unreadable", "frame index has no 'frames' array");

    UnifiedLog log;
    IntegrityReport report;
    auto error = [&](std::string code, int frame, std::string msg) {
        report.findings.push_back({Finding::Severity::error, std::move(code), frame, std::move(msg)});
    };
    auto warn = [&](std::string code, int frame, std::string msg) {
        report.findings.push_back({Finding::Severity::warn, std::move(code), frame, std::move(msg)});
    };

    bool have_rig = false;
    if (rig) {
        log.rig = *rig;
        have_rig = true;
    } else if (doc.contains("rig")) {
        try {
            log.rig = sensors::parse_rig(doc.at("rig"));
            have_rig = true;
        } catch (const Error& e) {
            error("MISSING_CALIBRATION", -1, std::string("stored rig is invalid: ") + e.what());
        }
    }
    if (!have_rig) {
        if (!report.first("MISSING_CALIBRATION")) error("MISSING_CALIBRATION", -1, "no sensor rig given or stored in the log");
    } else {
        if (log.rig.sensors.empty()) error("MISSING_CALIBRATION", -1, "rig has no sensors");
        for (const auto& s : log.rig.sensors) {
            if (!detail::pose_finite(s.extrinsic)) {
                error("MISSING_CALIBRATION", -1, "sensor '" + s.id + "' has no valid extrinsic");
                continue;
            }
            try {
                sensors::validate_rig(sensors::SensorRig{{s}});
            } catch (const Error& e) {
                error("MISSING_CALIBRATION", -1, e.what());
            }
        }
    }

    if (doc.contains("metadata") && doc.at("metadata").is_object()) {
        const json& md = doc.at("metadata");
        log.metadata.source = md.value("source", std::string());
    }

    const json& frames = doc.at("frames");
    if (frames.empty()) error("EMPTY_LOG", -1, "log has no frames");
    std::optional<double> prev_time;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const json& fj = frames[i];
        const int fi = static_cast<int>(i);
        LogFrame f;
        f.index = fi;
        try {
            f.time = get_number(fj, "time");
        } catch (const Error&) {
            error("MISSING_TIME", fi, "frame has no time");
            f.time = std::numeric_limits<double>::quiet_NaN();
        }
        if (std::isfinite(f.time)) {
            if (prev_time && !(f.time > *prev_time))
                error("NON_MONOTONIC_TIME", fi, "time " + std::to_string(f.time) + " does not exceed the previous frame's " + std::to_string(*prev_time));
            prev_time = f.time;
        }
        try {
            f.pose = to_pose(member(fj, "pose"));
            if (!detail::pose_finite(f.pose)) error("MISSING_POSE", fi, "vehicle pose is not finite");
        } catch (const Error&) {
            error("MISSING_POSE", fi, "frame has no vehicle pose");
        }
        try {
            f.images = detail::read_refs(fj, "images");
            f.clouds = detail::read_refs(fj, "clouds");
        } catch (const json::exception&) {
            error("MALFORMED_FRAME", fi, "artifact references must map sensor ids to paths");
        }

        std::map<std::string, int> refs;
        for (const auto& [id, p] : f.images) ++refs[id];
        for (const auto& [id, p] : f.clouds) ++refs[id];
        if (have_rig) {
            for (const auto& s : log.rig.sensors) {
                const auto it = refs.find(s.id);
                if (it == refs.end()) error("MISSING_REFERENCE", fi, "sensor '" + s.id + "' is not referenced");
                else if (it->second > 1) error("DUPLICATE_REFERENCE", fi, "sensor '" + s.id + "' is referenced more than once");
                const bool is_camera = s.kind() == sensors::SensorKind::camera;
                if (it != refs.end() && (is_camera ? !f.images.count(s.id) : !f.clouds.count(s.id)))
                    error("SENSOR_KIND_MISMATCH", fi, "sensor '" + s.id + "' is referenced under the wrong artifact kind");
            }
            for (const auto& [id, n] : refs)
                if (!log.rig.contains(id)) warn("UNKNOWN_SENSOR", fi, "sensor '" + id + "' is not in the rig");
        }
        for (const auto& [id, p] : f.images)
            if (!fs::is_regular_file(dir / p)) error("MISSING_ARTIFACT", fi, "image '" + p + "' does not exist");
        for (const auto& [id, p] : f.clouds) {
            if (!fs::is_regular_file(dir / p)) error("MISSING_ARTIFACT", fi, "cloud '" + p + "' does not exist");
            else if (!fs::is_regular_file(dir / detail::cloud_header_path(p)))
                error("MISSING_ARTIFACT", fi, "cloud header for '" + p + "' does not exist");
        }
        log.frames.push_back(std::move(f));
    }
    log.metadata.frame_count = static_cast<int>(log.frames.size());
    if (log.frames.size() >= 2 && std::isfinite(log.frames.back().time) && std::isfinite(log.frames.front().time))
        log.metadata.duration = log.frames.back().time - log.frames.front().time;
    if (doc.contains("metadata") && doc.at("metadata").is_object()) {
        const json& md = doc.at("metadata");
        if (md.contains("frame_count") && md.at("frame_count").is_number_integer() &&
            md.at("frame_count").get<int>() != log.metadata.frame_count)
            warn("FRAME_COUNT_MISMATCH", -1, "metadata frame count differs from the frame index");
        if (md.contains("duration") && md.at("duration").is_number()) log.metadata.duration = md.at("duration").get<double>();
    }
    return {std::move(log), std::move(report)};
}

} // namespace oasim::pipeline
