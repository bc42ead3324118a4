#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <string>

#include "oasim/error.hpp"
#include "oasim/parallel.hpp"
#include "oasim/pipeline/frames.hpp"
#include "oasim/pipeline/manifest.hpp"
#include "oasim/pipeline/scenario.hpp"
#include "oasim/render/annotations.hpp"
#include "oasim/render/cloud_io.hpp"
#include "oasim/render/image_io.hpp"
#include "oasim/render/render.hpp"
#include "oasim/version.hpp"

namespace oasim::pipeline {

struct ExportOptions {
    std::string job_id = "local";
    std::string created_at;                   // empty: current UTC time
    std::function<void(double)> on_progress;  // fraction of frames written
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string frame_dir(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frames/%06d", index);
    return buf;
}

/// Noise seed of one sensor's sweep in one frame.
inline std::uint64_t sweep_seed(std::uint64_t job_seed, int frame, std::size_t sensor_index) {
    return hash_key({job_seed, static_cast<std::uint64_t>(frame), static_cast<std::uint64_t>(sensor_index)});
}

inline std::map<std::string, InputRef> input_refs(const ScenarioSpec& spec) {
    std::map<std::string, InputRef> in;
    in["scenario"] = {spec.source_ref, sha256_hex(scenario_json(spec).dump())};
    in["scene"] = {spec.scene_ref, sha256_file(spec.scene_path())};
    in["map"] = {spec.map_ref, sha256_file(spec.map_path())};
    in["rig"] = spec.rig_inline ? InputRef{"inline", sha256_hex(spec.rig_inline->dump())}
                                : InputRef{spec.rig_ref, sha256_file(spec.rig_path())};
    return in;
}

/// Renders a job into `out_dir`. The manifest is written last, through a
/// temporary file and a rename; if anything fails there is no manifest.
/// Errors: OutputNotEmpty, Invalid, and whatever loading or rendering throws.
inline DatasetManifest export_dataset(const ScenarioSpec& spec, const fs::path& out_dir, const ExportOptions& opts = {}) {
    if (fs::exists(out_dir) && (!fs::is_directory(out_dir) || !fs::is_empty(out_dir)))
        fail("OutputNotEmpty", "output directory '" + out_dir.string() + "' is not empty");
    const PreparedJob job = prepare_job(spec);
    const hdmap::LaneGraph& g = *job.map;
    const unsigned threads = spec.threads ? spec.threads : default_threads();
    const int frames = spec.frame_count();
    fs::create_directories(out_dir);

    DatasetManifest m;
    m.job_id = opts.job_id;
    m.created_at = opts.created_at.empty() ? utc_timestamp() : opts.created_at;
    m.generator_version = kGeneratorVersion;
    m.seed = spec.seed;
    m.frame_rate = spec.frame_rate;
    m.duration = spec.duration;
    m.inputs = input_refs(spec);

    json log_frames = json::array();
    std::string annotations;
    traffic::World world = job.world0;
    for (int k = 0; k < frames; ++k) {
        const double t = static_cast<double>(k) / spec.frame_rate;
        world = traffic::simulate_until(g, std::move(world), &job.ego, spec.traffic, t, job.ego_length);
        const FrameState state = make_frame_state(job, world, t);
        const std::string dir = frame_dir(k);
        fs::create_directories(out_dir / dir);

        ManifestFrame mf;
        mf.index = k;
        mf.time = t;
        json images = json::object(), clouds = json::object();
        for (std::size_t si = 0; si < job.rig.sensors.size(); ++si) {
            const sensors::Sensor& sensor = job.rig.sensors[si];
            if (sensor.kind() == sensors::SensorKind::camera) {
                const Pose pose = compose(state.ego_pose, sensor.extrinsic);
                const render::RenderFrame f = render::render_camera(*state.snapshot, sensor.camera(), pose, threads);
                const std::string rgb = dir + "/" + sensor.id + ".png";
                render::write_bytes(out_dir / rgb, render::encode_rgb_png(f));
                mf.images[sensor.id] = rgb;
                images[sensor.id] = rgb;
                if (spec.write_depth) {
                    const std::string depth = dir + "/" + sensor.id + "_depth.png";
                    render::write_bytes(out_dir / depth, render::encode_depth_png(f));
                    mf.depth[sensor.id] = depth;
                }
            } else {
                const render::PointCloud c = render::render_lidar(*state.snapshot, sensor.lidar(), sensor.extrinsic, job.ego, t,
                                                                  sweep_seed(spec.seed, k, si), threads);
                const std::string data = dir + "/" + sensor.id + ".bin";
                const std::string header = dir + "/" + sensor.id + ".json";
                render::write_bytes(out_dir / data, render::encode_cloud(c));
                const std::string header_text = render::cloud_header(c, sensor.id, sensor.id + ".bin").dump(2) + "\n";
                render::write_bytes(out_dir / header, render::Bytes(header_text.begin(), header_text.end()));
                mf.clouds[sensor.id] = {data, header};
                clouds[sensor.id] = data;
            }
        }
        annotations += render::annotations_json(render::extract_annotations(state.actors, state.ego_pose), k, t).dump() + "\n";
        mf.annotation = kAnnotationsFile;
        mf.annotation_line = k;
        mf.pose = kLogFile;
        m.frames.push_back(std::move(mf));
        log_frames.push_back({{"index", k},
                              {"time", t},
                              {"pose", pose_json(state.ego_pose)},
                              {"speed", state.ego_speed},
                              {"images", images},
                              {"clouds", clouds}});
        if (opts.on_progress) opts.on_progress(static_cast<double>(k + 1) / frames);
    }

    render::write_bytes(out_dir / kAnnotationsFile, render::Bytes(annotations.begin(), annotations.end()));
    const json log = {{"format", "oasim.log.v1"},
                      {"metadata", {{"source", kGeneratorVersion}, {"frame_count", frames}, {"duration", spec.duration}}},
                      {"rig", sensors::rig_json(job.rig)},
                      {"frames", log_frames}};
    const std::string log_text = log.dump(2) + "\n";
    render::write_bytes(out_dir / kLogFile, render::Bytes(log_text.begin(), log_text.end()));

    for (const auto& rel : files_on_disk(out_dir)) {
        const auto bytes = render::read_bytes(out_dir / rel);
        m.artifacts.push_back({rel, sha256_hex(bytes), bytes.size()});
    }
    const std::string text = manifest_text(m);
    const fs::path tmp = out_dir / (std::string(kManifestFile) + ".tmp");
    render::write_bytes(tmp, render::Bytes(text.begin(), text.end()));
    fs::rename(tmp, out_dir / kManifestFile);
    return m;
}

} // namespace oasim::pipeline
