#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lectern/codegen/codegen.hpp"
#include "lectern/core/canonical.hpp"
#include "lectern/debugger/renderer.hpp"
#include "lectern/gateway/llm.hpp"

namespace lectern::debugger {

enum class AttemptOutcome { ok, error };
enum class FinalOutcome { ok, fallback };

std::string to_name(AttemptOutcome o);
std::string to_name(FinalOutcome o);

struct RenderAttempt {
    int attempt_index = 0;  // 1-based
    AttemptOutcome outcome = AttemptOutcome::ok;
    std::optional<std::string> error_trace;
    std::vector<std::string> repaired_element_ids;  // changed in response to this attempt

    bool operator==(const RenderAttempt&) const = default;
};

struct Substitution {
    std::string element_id;
    std::string template_name;

    bool operator==(const Substitution&) const = default;
};

struct DebugTrace {
    std::vector<RenderAttempt> attempts;
    FinalOutcome final_outcome = FinalOutcome::ok;
    std::vector<Substitution> fallback_substitutions;

    int repairs() const;
    bool operator==(const DebugTrace&) const = default;
};

Json to_json(const DebugTrace& trace);
DebugTrace debug_trace_from_json(const Json& j);

inline constexpr int kDefaultRetryThreshold = 3;

// Line number named by a render error: the deepest frame in `source_file`
// (any file when empty), else the deepest frame outside installed packages,
// else the last bare "line N".
std::optional<int> error_line(const std::string& error_trace, const std::string& source_file = {});

// Anchor whose marker is the nearest at or above the error line.
std::optional<std::string> localize(const std::string& source, const std::string& error_trace,
                                    const std::string& source_file = {});

struct RepairResult {
    SceneProgram scene;
    std::vector<std::string> element_ids;  // elements the call was scoped to
    bool localized = false;                // false: whole-scene repair
};

// Element ids a localized repair may touch: the anchor event's targets and
// their group descendants. Empty when the anchor is unknown or targets nothing.
std::vector<std::string> fragment_ids(const SceneProgram& scene, const std::string& anchor_id);

// One LLM call scoped to the localized fragment (or the whole scene).
// Elements outside the scope are untouched; the answer must return exactly
// the scoped ids. Throws LlmSchemaFailure or SchemaError on a bad answer.
RepairResult repair(const SceneProgram& scene, const std::string& error_trace, const codegen::DialectSpec& dialect,
                    gateway::LlmClient& llm, const std::string& source_file = {});

// Standard template for an element kind; empty for groups.
std::string template_name(ElementKind kind);
inline constexpr std::string_view kTemplateSuffix = "-tpl";

// Replaces each failing element with its standard template, keeping the
// content verbatim, and retargets events and group children. Groups are
// containers: a failing group has its leaves substituted instead.
SceneProgram fallback(const SceneProgram& scene, const std::vector<std::string>& failing_ids,
                      const codegen::DialectSpec& dialect, std::vector<Substitution>* substitutions = nullptr);

// True when every non-group element is a standard template instance.
bool is_fully_templated(const SceneProgram& scene);

struct DebugResult {
    SceneProgram scene;
    DebugTrace trace;
};

// Render, repair on failure, and after `tau` failed repair rounds fall back
// to templates. At most tau + 1 renders. RendererUnavailable propagates.
DebugResult run_debug_loop(const SceneProgram& scene, Renderer& renderer, int tau,
                           const codegen::DialectSpec& dialect, gateway::LlmClient& llm);

}  // namespace lectern::debugger
