#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include "lectern/core/canonical.hpp"
#include "lectern/core/types.hpp"
#include "lectern/pipeline/pipeline.hpp"

namespace httplib {
class Server;
}

namespace lectern::pipeline {

inline constexpr double kPreviewPxPerUnit = 100.0;

// Deterministic SVG of a scene: one <g id="el-<id>"> per element with a
// rectangle and a text label, y pointing down, 100 px per unit. Elements in
// `conflicted` get the class "conflict".
std::string preview_svg(const SceneProgram& scene, const FrameSpec& frame, const ConflictReport& conflicts);

// Server-side review state machine over a project root. Every operation
// takes the run lock for its duration. ReviewError detail codes:
// not_found, stale_revision, not_ready.
class ReviewDesk {
public:
    using Continue = std::function<RunResult(const std::string& run_id)>;

    ReviewDesk(std::filesystem::path project_root, Continue on_continue);

    Json runs() const;
    Json pages(const std::string& run_id) const;
    std::string preview(const std::string& run_id, int page) const;
    ConflictReport conflicts(const std::string& run_id, int page) const;

    // Applies the EditSet to the page's current scene and makes it final.
    // `if_match` is the revision the client edited against.
    Json post_edits(const std::string& run_id, int page, const EditSet& edits, std::optional<int> if_match);
    // A page without an EditSet gets an empty one first.
    Json approve(const std::string& run_id, int page, std::optional<int> if_match);
    // Requires every page approved; records the request and resumes the run.
    Json continue_run(const std::string& run_id);

    int revision(const std::string& run_id, int page) const;

    // Turns the review gate on for a run that has not rendered yet. Returns
    // whether the gate is on afterwards.
    bool enable_review(const std::string& run_id);

private:
    ProjectStore store(const std::string& run_id) const;
    Json apply(ProjectStore& store, RunState& state, int page, const EditSet& edits, const std::string& note);

    std::filesystem::path root_;
    Continue on_continue_;
    mutable std::mutex mutex_;
};

// Registers the review routes. Bodies use the canonical format; errors are
// {code, message} with 400/404/409/500.
void mount_review_api(httplib::Server& server, ReviewDesk& desk);

// Blocks serving the review API on host:port.
void serve_review(ReviewDesk& desk, const std::string& host, int port);

}  // namespace lectern::pipeline
