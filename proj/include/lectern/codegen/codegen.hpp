#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "lectern/core/types.hpp"
#include "lectern/gateway/llm.hpp"

namespace lectern::codegen {

struct DialectSpec {
    std::string name;
    std::function<std::string(const SceneProgram&)> emit;    // empty: no emit capability
    std::function<SceneProgram(std::string_view)> parse;     // empty: no parse capability
    bool lossless_parse = false;  // parse recovers the whole IR, not just anchors and timing
};

class DialectRegistry {
public:
    // Registry pre-populated with "ir-json" and "manim-ce".
    static DialectRegistry& global();

    // Throws DialectError if the name is already taken.
    void add(DialectSpec spec);
    const DialectSpec& get(const std::string& name) const;  // DialectError if unknown
    std::vector<std::string> names() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, DialectSpec> dialects_;
};

const DialectSpec& dialect(const std::string& name);

std::string marker(const std::string& anchor_id);  // "@@anchor:<id>@@"

struct MarkerHit {
    std::string anchor_id;
    int line = 0;  // 1-based
    bool operator==(const MarkerHit&) const = default;
};

// Every well-formed marker in `text`, in order. A "@@anchor:" that does not
// close over a valid identifier raises ParseError with its line.
std::vector<MarkerHit> scan_markers(std::string_view text);

std::string emit(const SceneProgram& scene, const DialectSpec& dialect);
SceneProgram parse_emitted(std::string_view source, const DialectSpec& dialect);

// Built-in emitters and parsers (also reachable through the registry).
std::string emit_ir_json(const SceneProgram& scene);
SceneProgram parse_ir_json(std::string_view source);
std::string emit_manim(const SceneProgram& scene);
// Partial parse: page index, stage and the event list (anchors, verbs,
// targets, start times, durations). Elements are not recovered.
SceneProgram parse_manim(std::string_view source);

// Python string literal with '@' escaped so literals never forge markers.
std::string python_literal(std::string_view text);

// Extra structural rules for generated scenes: every visual intent is
// realised by an element styled "intent": "<index>", every element is shown
// by an appear event. Throws SchemaError.
void check_generated(const SceneProgram& scene, const PageBlueprint& blueprint);

// One LLM call proposing the scene IR; source_text is emitted in `dialect`.
SceneProgram generate_scene(const PageBlueprint& blueprint, const FrameSpec& frame, const DialectSpec& dialect,
                            gateway::LlmClient& llm);

}  // namespace lectern::codegen
