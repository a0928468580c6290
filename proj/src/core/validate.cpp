#include "lectern/core/validate.hpp"

#include <cmath>
#include <regex>
#include <set>

#include "lectern/core/errors.hpp"
#include "lectern/core/geometry.hpp"

namespace lectern {

bool is_valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '_' || c == '.' || c == '-';
        if (!ok) return false;
    }
    return true;
}

bool is_valid_language_tag(const std::string& tag) {
    // language[-script][-region](-variant)*
    static const std::regex re(
        R"(^[A-Za-z]{2,3}(-[A-Za-z]{4})?(-([A-Za-z]{2}|[0-9]{3}))?(-([A-Za-z0-9]{5,8}|[0-9][A-Za-z0-9]{3}))*$)");
    return std::regex_match(tag, re);
}

std::vector<Violation> validate_scene(const SceneProgram& scene) {
    std::vector<Violation> out;
    auto add = [&](std::string code, std::string subject, std::string message) {
        out.push_back({std::move(code), std::move(subject), std::move(message)});
    };

    std::set<std::string> ids;
    for (const auto& e : scene.elements) {
        if (!is_valid_id(e.id)) add("invalid-id", e.id, "element id '" + e.id + "' is not a valid identifier");
        if (!ids.insert(e.id).second) add("duplicate-id", e.id, "element id '" + e.id + "' is not unique");
        if (!(e.bbox.w > 0) || !(e.bbox.h > 0) || !std::isfinite(e.bbox.cx) || !std::isfinite(e.bbox.cy))
            add("malformed-bbox", e.id, "element '" + e.id + "' has a degenerate bbox");
        if (e.kind != ElementKind::group && !e.children.empty())
            add("non-group-children", e.id, "only groups may have children");
    }

    for (const auto& e : scene.elements) {
        if (e.kind != ElementKind::group) continue;
        const auto outer = geom::to_tick_box(e.bbox);
        for (const auto& child : e.children) {
            const SceneElement* c = scene.find_element(child);
            if (!c) {
                add("dangling-child", child, "group '" + e.id + "' names missing child '" + child + "'");
                continue;
            }
            if (!geom::contains(outer, geom::to_tick_box(c->bbox)))
                add("group-containment", e.id, "group '" + e.id + "' does not contain child '" + child + "'");
        }
    }

    std::set<std::string> anchors;
    bool any_unscheduled = false;
    for (const auto& ev : scene.events) {
        if (!is_valid_id(ev.anchor_id))
            add("invalid-anchor", ev.anchor_id, "anchor id '" + ev.anchor_id + "' is not a valid identifier");
        if (!anchors.insert(ev.anchor_id).second)
            add("duplicate-anchor", ev.anchor_id, "anchor '" + ev.anchor_id + "' is not unique");
        for (const auto& t : ev.target_ids)
            if (!ids.count(t)) add("dangling-target", t, "event '" + ev.anchor_id + "' targets missing element '" + t + "'");
        if (ev.verb != EventVerb::wait && ev.target_ids.empty())
            add("empty-targets", ev.anchor_id, "event '" + ev.anchor_id + "' has no targets");
        if (!(ev.duration_s >= 0)) add("negative-duration", ev.anchor_id, "event duration must be >= 0");
        if (ev.start_s && !(*ev.start_s >= 0)) add("negative-start", ev.anchor_id, "event start must be >= 0");
        if (!ev.start_s) any_unscheduled = true;
    }

    if (scene.stage >= SceneStage::synced) {
        if (any_unscheduled) add("unscheduled-event", "", "synced scene has events without start_s");
        for (std::size_t i = 1; i < scene.events.size(); ++i) {
            const auto& a = scene.events[i - 1].start_s;
            const auto& b = scene.events[i].start_s;
            if (a && b && *b < *a) {
                add("unsorted-events", "", "event start times are not non-decreasing");
                break;
            }
        }
    }
    return out;
}

void validate_outline(const LectureOutline& outline) {
    if (outline.topic_keywords.empty()) throw ValidationError("outline: topic_keywords must be non-empty");
    for (const auto& k : outline.topic_keywords)
        if (k.empty()) throw ValidationError("outline: topic keyword must be non-empty");
    if (!is_valid_language_tag(outline.language))
        throw ValidationError("outline: '" + outline.language + "' is not a valid BCP-47 tag");
}

void validate_config(const PipelineConfig& cfg) {
    if (!(cfg.target_duration_s > 0)) throw ConfigError("target_duration_s must be > 0");
    if (!(cfg.words_per_minute_default > 0)) throw ConfigError("words_per_minute_default must be > 0");
    if (!(cfg.frame.width_u > 0) || !(cfg.frame.height_u > 0)) throw ConfigError("frame size must be positive");
    if (cfg.page_density_max < 1) throw ConfigError("page_density_max must be >= 1");
    if (cfg.retry_threshold < 1) throw ConfigError("retry_threshold must be >= 1");
    if (!(cfg.margin_u >= 0)) throw ConfigError("margin_u must be >= 0");
    if (cfg.segment_budget_words < 1) throw ConfigError("segment_budget_words must be >= 1");
    if (!(cfg.cell_u > 0)) throw ConfigError("cell_u must be > 0");
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (cfg.llm_max_attempts < 1) throw ConfigError("llm_max_attempts must be >= 1");
    if (cfg.dialect != "manim-ce" && cfg.dialect != "ir-json")
        throw ConfigError("unknown dialect '" + cfg.dialect + "'");
    if (cfg.tts_backend != "mock" && cfg.tts_backend != "service")
        throw ConfigError("unknown tts_backend '" + cfg.tts_backend + "'");
}

void validate_skeleton(const Skeleton& skeleton) {
    if (skeleton.concepts.empty()) throw SchemaError("skeleton has no concepts");
    std::set<std::string> seen;
    for (const auto& c : skeleton.concepts) {
        if (!is_valid_id(c.id)) throw SchemaError("concept id '" + c.id + "' is not a valid identifier");
        if (c.title.empty()) throw SchemaError("concept '" + c.id + "' has an empty title");
        for (const auto& d : c.depends_on)
            if (!seen.count(d))
                throw SchemaError("concept '" + c.id + "' depends on '" + d + "', which is not an earlier concept");
        if (!seen.insert(c.id).second) throw SchemaError("duplicate concept id '" + c.id + "'");
    }
}

void validate_manuscript(const Manuscript& manuscript, const Skeleton& skeleton) {
    std::set<std::string> ids;
    for (const auto& c : skeleton.concepts) ids.insert(c.id);
    for (const auto& s : manuscript.sections) {
        if (!ids.count(s.concept_id)) throw SchemaError("section names unknown concept '" + s.concept_id + "'");
        if (s.body.empty()) throw SchemaError("section '" + s.concept_id + "' has an empty body");
    }
    Manuscript check = manuscript;
    if (check.recount().word_count != manuscript.word_count)
        throw SchemaError("manuscript word_count is stale");
}

void validate_segments(const std::vector<Segment>& segments, int section_count) {
    int cursor = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (s.index != static_cast<int>(i)) throw ValidationError("segment indices must be consecutive");
        if (s.section_span.begin != cursor || s.section_span.empty())
            throw ValidationError("segment spans must be contiguous and non-empty");
        cursor = s.section_span.end;
    }
    if (cursor != section_count) throw ValidationError("segments do not cover every section");
}

void validate_blueprint(const PageBlueprint& page, int density_max) {
    if (page.title.empty()) throw SchemaError("page has an empty title");
    if (page.bullet_points.empty() && page.visual_intents.empty())
        throw SchemaError("page '" + page.title + "' has neither bullets nor visual intents");
    for (const auto& b : page.bullet_points)
        if (b.empty()) throw SchemaError("page '" + page.title + "' has an empty bullet");
    if (page.source_span.empty()) throw SchemaError("page '" + page.title + "' has an empty source_span");
    if (page.est_density < 0) throw SchemaError("page '" + page.title + "' has negative density");
    if (page.est_density > density_max)
        throw SchemaError("page '" + page.title + "' density " + std::to_string(page.est_density) +
                          " exceeds maximum " + std::to_string(density_max));
}

std::vector<Violation> validate_narration(const NarrationScript& script, const SceneProgram& scene) {
    std::vector<Violation> out;
    std::set<std::string> ids;
    for (const auto& u : script.units) {
        if (!ids.insert(u.unit_id).second)
            out.push_back({"duplicate-unit", u.unit_id, "unit id '" + u.unit_id + "' is not unique"});
        if (u.text.empty()) out.push_back({"empty-unit", u.unit_id, "unit '" + u.unit_id + "' has no text"});
        if (u.anchor_ref && !scene.find_event(*u.anchor_ref))
            out.push_back({"dangling-anchor", *u.anchor_ref,
                           "unit '" + u.unit_id + "' references missing anchor '" + *u.anchor_ref + "'"});
    }
    return out;
}

void advance_stage(SceneProgram& scene, SceneStage to) {
    if (to < scene.stage)
        throw ValidationError("scene stage cannot move from " + to_name(scene.stage) + " back to " + to_name(to));
    scene.stage = to;
}

}  // namespace lectern
