#pragma once

#include <string>
#include <vector>

#include "lectern/core/types.hpp"

namespace lectern {

struct Violation {
    std::string code;     // e.g. "dangling-target", "unsorted-events"
    std::string subject;  // offending id, or empty for scene-wide issues
    std::string message;

    bool operator==(const Violation&) const = default;
};

// Every invariant violation in `scene`; empty means valid.
std::vector<Violation> validate_scene(const SceneProgram& scene);

// Identifier charset shared by element ids and anchor ids: [A-Za-z0-9_.-]+.
bool is_valid_id(const std::string& id);

bool is_valid_language_tag(const std::string& tag);

// Throwing checks for the planning types. Messages name the offending field.
void validate_outline(const LectureOutline& outline);
void validate_config(const PipelineConfig& cfg);
void validate_skeleton(const Skeleton& skeleton);
void validate_manuscript(const Manuscript& manuscript, const Skeleton& skeleton);
void validate_segments(const std::vector<Segment>& segments, int section_count);

// Raises SchemaError when a blueprint breaks a structural rule.
void validate_blueprint(const PageBlueprint& page, int density_max);

// Anchor refs must name events of the matching scene.
std::vector<Violation> validate_narration(const NarrationScript& script,
                                          const SceneProgram& scene);

// Moves `scene` to `to`; throws ValidationError if that would be a regression.
void advance_stage(SceneProgram& scene, SceneStage to);

}  // namespace lectern
