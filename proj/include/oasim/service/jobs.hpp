#pragma once

#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/json_util.hpp"
#include "oasim/pipeline/export.hpp"
#include "oasim/pipeline/scenario.hpp"

namespace oasim::service {

enum class JobState { queued, running, done, failed };

inline std::string to_string(JobState s) {
    switch (s) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::done: return "done";
        default: return "failed";
    }
}

struct GenerationJob {
    std::string id;
    pipeline::ScenarioSpec spec;
    JobState state = JobState::queued;
    double progress = 0.0;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> manifest_path;
    std::string error_code, error_message;
    std::vector<JobState> history{JobState::queued};
};

inline json job_json(const GenerationJob& j) {
    json hist = json::array();
    for (auto s : j.history) hist.push_back(to_string(s));
    json out = {{"id", j.id},
                {"state", to_string(j.state)},
                {"progress", j.progress},
                {"output", j.output_dir.string()},
                {"manifest", j.manifest_path ? json(j.manifest_path->string()) : json(nullptr)},
                {"history", hist},
                {"spec", pipeline::scenario_json(j.spec)}};
    if (j.state == JobState::failed) out["error"] = {{"code", j.error_code}, {"message", j.error_message}};
    return out;
}

/// Bounded worker pool running exports. Each job writes to its own
/// directory `<jobs_dir>/<job id>`.
class JobRunner {
  public:
    JobRunner(std::filesystem::path jobs_dir, unsigned workers = 1) : jobs_dir_(std::move(jobs_dir)) {
        if (workers == 0) workers = 1;
        for (unsigned i = 0; i < workers; ++i) workers_.emplace_back([this](std::stop_token st) { run(st); });
    }
    ~JobRunner() {
        {
            std::lock_guard lk(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.request_stop();
        cv_.notify_all();
    }
    JobRunner(const JobRunner&) = delete;
    JobRunner& operator=(const JobRunner&) = delete;

    /// Validates and enqueues. Errors: Invalid (and loading errors such as
    /// NotFound for bad references).
    std::string submit(pipeline::ScenarioSpec spec) {
        pipeline::validate_spec(spec);
        (void)pipeline::prepare_job(spec);  // surfaces bad references and infeasible traffic now
        std::lock_guard lk(mu_);
        char buf[32];
        do std::snprintf(buf, sizeof buf, "job-%06llu", ++counter_);
        while (std::filesystem::exists(jobs_dir_ / buf));
        GenerationJob job;
        job.id = buf;
        job.spec = std::move(spec);
        job.output_dir = jobs_dir_ / job.id;
        jobs_[job.id] = job;
        queue_.push_back(job.id);
        cv_.notify_one();
        return job.id;
    }

    GenerationJob status(const std::string& id) const {
        std::lock_guard lk(mu_);
        const auto it = jobs_.find(id);
        if (it == jobs_.end()) fail("NotFound", "no job '" + id + "'");
        return it->second;
    }

    /// Blocks until the job is done or failed, or the timeout passes.
    GenerationJob wait(const std::string& id, std::chrono::milliseconds timeout) const {
        std::unique_lock lk(mu_);
        const auto it = jobs_.find(id);
        if (it == jobs_.end()) fail("NotFound", "no job '" + id + "'");
        done_cv_.wait_for(lk, timeout, [&] { return it->second.state == JobState::done || it->second.state == JobState::failed; });
        return it->second;
    }

  private:
    void set_state(GenerationJob& j, JobState s) {
        j.state = s;
        j.history.push_back(s);
    }

    void run(std::stop_token st) {
        for (;;) {
            std::string id;
            pipeline::ScenarioSpec spec;
            std::filesystem::path out;
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return stopping_ || st.stop_requested() || !queue_.empty(); });
                if (stopping_ || st.stop_requested()) return;
                id = queue_.front();
                queue_.pop_front();
                auto& j = jobs_.at(id);
                set_state(j, JobState::running);
                spec = j.spec;
                out = j.output_dir;
            }
            try {
                pipeline::ExportOptions opts;
                opts.job_id = id;
                opts.on_progress = [&](double f) {
                    std::lock_guard lk(mu_);
                    jobs_.at(id).progress = f;
                };
                pipeline::export_dataset(spec, out, opts);
                std::lock_guard lk(mu_);
                auto& j = jobs_.at(id);
                j.progress = 1.0;
                j.manifest_path = out / pipeline::kManifestFile;
                set_state(j, JobState::done);
            } catch (const std::exception& e) {
                std::lock_guard lk(mu_);
                auto& j = jobs_.at(id);
                const auto* err = dynamic_cast<const Error*>(&e);
                j.error_code = err ? err->code() : "Internal";
                j.error_message = e.what();
                set_state(j, JobState::failed);
            }
            done_cv_.notify_all();
        }
    }

    std::filesystem::path jobs_dir_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    mutable std::condition_variable done_cv_;
    std::map<std::string, GenerationJob> jobs_;
    std::deque<std::string> queue_;
    unsigned long long counter_ = 0;
    bool stopping_ = false;
    std::vector<std::jthread> workers_;  // last: joined before the rest is destroyed
};

} // namespace oasim::service
