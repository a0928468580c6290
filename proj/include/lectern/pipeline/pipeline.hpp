#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lectern/core/types.hpp"
#include "lectern/debugger/renderer.hpp"
#include "lectern/gateway/gateway.hpp"
#include "lectern/gateway/llm.hpp"
#include "lectern/narrator/narrator.hpp"
#include "lectern/pipeline/state.hpp"

namespace lectern::pipeline {

// Joins a rendered page with its audio, and the joined pages into one video.
class Muxer {
public:
    virtual ~Muxer() = default;
    // Returns the muxed segment's locator.
    virtual std::string mux(const VideoSegment& segment, const std::filesystem::path& run_dir) = 0;
    // Returns the merged locator; segments arrive in page order.
    virtual std::string concat(const std::vector<VideoSegment>& segments, const std::filesystem::path& run_dir) = 0;
};

// Mock backend: segments pass through and the merge is a manifest file
// ("merged.manifest", an ordered list with durations) instead of media.
class ManifestMuxer final : public Muxer {
public:
    std::string mux(const VideoSegment& segment, const std::filesystem::path& run_dir) override;
    std::string concat(const std::vector<VideoSegment>& segments, const std::filesystem::path& run_dir) override;
};

// Runs a command template. Placeholders: {mode} (mux|concat), {video},
// {audio}, {list} (a file of input paths, one per line), {output}.
class CommandMuxer final : public Muxer {
public:
    explicit CommandMuxer(CommandBackend backend);
    std::string mux(const VideoSegment& segment, const std::filesystem::path& run_dir) override;
    std::string concat(const std::vector<VideoSegment>& segments, const std::filesystem::path& run_dir) override;

private:
    CommandBackend backend_;
};

// "null" → ManifestMuxer, "external" → CommandMuxer.
std::shared_ptr<Muxer> make_muxer(const CommandBackend& backend);

// Muxes every page and concatenates in page order. Pages must be exactly
// 1..page_count; a missing page or video raises MergeError naming it. A
// single page is its own merge.
VideoArtifact merge(const std::vector<VideoSegment>& rendered, int page_count, Muxer& muxer,
                    const std::filesystem::path& run_dir);

std::string make_run_id(const LectureOutline& outline, const PipelineConfig& config);

struct Services {
    gateway::LlmClient& llm;
    narrator::TtsBackend& tts;
    debugger::Renderer& renderer;
    Muxer& muxer;
};

struct RunOptions {
    // Called after each page's automatic stages are committed. Throwing
    // from it aborts the run with everything so far persisted.
    std::function<void(int page)> after_page;
};

enum class RunStatus { completed, awaiting_review };

struct RunResult {
    std::string run_id;
    RunStatus status = RunStatus::completed;
    std::optional<PipelineOutput> output;
};

// Per-page debug and layout record stored as pages/<i>/trace.
struct PageTrace {
    Json debug;
    ConflictReport detected;
    PlacementPlan placement;
    std::vector<std::string> sync_warnings;
};

class Pipeline {
public:
    Pipeline(std::filesystem::path project_root, Services services, RunOptions options = {});

    // Starts the run for (outline, config), or continues it if it exists.
    RunResult run(const LectureOutline& outline, const PipelineConfig& config);
    // Continues a stored run from its furthest completed stages.
    RunResult resume(const std::string& run_id);

    // Single stages against a run directory, for the CLI.
    Manuscript plan(const LectureOutline& outline, const PipelineConfig& config);
    std::vector<PageBlueprint> paginate(const std::string& run_id);

    const std::filesystem::path& project_root() const { return root_; }

private:
    RunResult advance(ProjectStore& store, RunState& state, const LectureOutline& outline,
                      const PipelineConfig& config);

    std::filesystem::path root_;
    Services services_;
    RunOptions options_;
};

// Reads every artifact the state claims is complete; ResumeError names the
// first one that is missing or corrupt.
void verify_artifacts(const ProjectStore& store, const RunState& state);

}  // namespace lectern::pipeline
