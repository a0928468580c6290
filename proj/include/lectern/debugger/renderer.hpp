#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "lectern/core/types.hpp"

namespace lectern::debugger {

enum class RenderMode { check, full };

struct RenderRequest {
    int page_index = 0;
    std::string source;
    std::string dialect = "manim-ce";
    RenderMode mode = RenderMode::check;
    std::filesystem::path work_dir;  // empty: a fresh directory under the system temp dir
};

struct RenderOutcome {
    int exit_status = 0;
    std::string stderr_text;
    std::optional<std::string> output_ref;  // full mode only
    std::string source_path;                // file name the renderer saw

    bool ok() const { return exit_status == 0; }
};

// Renders or compile-checks one page. Implementations must tolerate
// concurrent calls. Infrastructure faults raise RendererUnavailable; code
// faults are reported through a non-zero exit status.
class Renderer {
public:
    virtual ~Renderer() = default;
    virtual RenderOutcome render(const RenderRequest& request) = 0;
};

// Always succeeds. Full mode yields "null://page-<i>".
class NullRenderer final : public Renderer {
public:
    RenderOutcome render(const RenderRequest& request) override;
};

// Fault injection. Fails the first `fail_count` calls, or, when a predicate
// is set, every call whose source satisfies it. The error trace names the
// line just below the marker of `fault_anchor` (the first non-wait marker
// when unset); with `line_info` off it carries no line number at all.
class ScriptedRenderer final : public Renderer {
public:
    struct Options {
        int fail_count = 0;
        std::function<bool(const std::string&)> fails_when;
        std::optional<std::string> fault_anchor;
        bool line_info = true;
    };

    explicit ScriptedRenderer(Options options);
    RenderOutcome render(const RenderRequest& request) override;
    int calls() const;

private:
    Options options_;
    mutable std::mutex mutex_;
    int calls_ = 0;
};

// Runs a user command through /bin/sh. Placeholders: {source}, {workdir},
// {page}, {mode} (check|full), {output}. Exit 126/127 or a failed spawn is
// RendererUnavailable; a timeout is a code fault with a synthetic trace.
class ExternalRenderer final : public Renderer {
public:
    explicit ExternalRenderer(CommandBackend backend);
    RenderOutcome render(const RenderRequest& request) override;

private:
    CommandBackend backend_;
};

struct CommandResult {
    int exit_status = 0;
    std::string stderr_text;
    bool timed_out = false;
};

// Shared by the external renderer and the muxer.
CommandResult run_command(const std::string& command, const std::filesystem::path& work_dir, double timeout_s);

std::string shell_quote(const std::string& s);

// Builds the renderer named by `backend.backend` ("null" or "external";
// "scripted" needs code and is rejected with ConfigError).
std::shared_ptr<Renderer> make_renderer(const CommandBackend& backend);

}  // namespace lectern::debugger
