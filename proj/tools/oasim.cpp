// oasim command line: service, batch generation, and file validation.
#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>

#include "oasim/hdmap/lane_graph.hpp"
#include "oasim/pipeline/export.hpp"
#include "oasim/pipeline/scenario.hpp"
#include "oasim/sensors/rig.hpp"
#include "oasim/service/http.hpp"
#include "oasim/version.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int report_error(const oasim::Error& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"oasim: SDF driving-scene simulator and dataset generator"};
    app.set_version_flag("--version", oasim::kGeneratorVersion);
    app.require_subcommand(1);

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string data = ".";
    unsigned workers = 1;
    auto* serve = app.add_subcommand("serve", "run the HTTP/JSON API");
    serve->add_option("--port", port, "listen port")->check(CLI::Range(1, 65535));
    serve->add_option("--host", host, "listen address");
    serve->add_option("--data", data, "data root (OASIM_DATA overrides)");
    serve->add_option("--workers", workers, "job worker threads")->check(CLI::PositiveNumber);

    std::string scenario, out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    auto* generate = app.add_subcommand("generate", "render a scenario into a dataset directory");
    generate->add_option("--scenario", scenario, "scenario.json")->required()->check(CLI::ExistingFile);
    generate->add_option("--out", out, "output directory (empty or absent)")->required();
    generate->add_option("--seed", seed, "seed (overrides the scenario)");
    generate->add_option("--threads", threads, "render threads (output does not depend on it)");

    std::string map_file, rig_file;
    auto* vmap = app.add_subcommand("validate-map", "parse and validate an HD map");
    vmap->add_option("file", map_file)->required()->check(CLI::ExistingFile);
    auto* vrig = app.add_subcommand("validate-rig", "parse and validate a sensor rig");
    vrig->add_option("file", rig_file)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            oasim::service::ServiceConfig cfg;
            cfg.data_root = oasim::service::data_root(data);
            cfg.job_workers = workers;
            oasim::service::SimService svc(cfg);
            httplib::Server server;
            oasim::service::register_routes(server, svc);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << cfg.data_root << " on " << host << ":" << port << "\n";
            if (!server.listen(host, port)) {
                std::cerr << "cannot listen on " << host << ":" << port << "\n";
                return 1;
            }
            return 0;
        }
        if (*generate) {
            auto spec = oasim::pipeline::load_scenario(scenario);
            if (seed) spec.seed = *seed;
            spec.threads = threads;
            oasim::pipeline::ExportOptions opts;
            opts.job_id = "cli";
            const auto m = oasim::pipeline::export_dataset(spec, out, opts);
            std::cout << "wrote " << m.frames.size() << " frames, " << m.artifacts.size() << " artifacts to " << out << "\n";
            return 0;
        }
        if (*vmap) {
            const auto g = oasim::hdmap::load_hdmap_file(map_file);
            std::cout << "ok: " << g.lanes().size() << " lanes, " << g.successor_edge_count() << " successor edges, "
                      << g.neighbor_pair_count() << " neighbor pairs, " << g.features().size() << " features\n";
            return 0;
        }
        if (*vrig) {
            const auto rig = oasim::sensors::load_rig_file(rig_file);
            std::cout << "ok: " << rig.sensors.size() << " sensors\n";
            for (const auto& s : rig.sensors)
                std::cout << "  " << s.id << " (" << (s.kind() == oasim::sensors::SensorKind::camera ? "camera" : "lidar") << ")\n";
            return 0;
        }
    } catch (const oasim::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
