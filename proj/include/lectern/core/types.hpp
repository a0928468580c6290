#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lectern {

enum class AudienceLevel { intro, intermediate, advanced };

struct LectureOutline {
    std::vector<std::string> topic_keywords;
    AudienceLevel audience_level = AudienceLevel::intro;
    std::string language = "en";
    std::optional<std::string> free_notes;

    bool operator==(const LectureOutline&) const = default;
};

// Scene frame, centered on the origin with +x right and +y up.
struct FrameSpec {
    double width_u = 16.0;
    double height_u = 9.0;

    bool operator==(const FrameSpec&) const = default;
};

// Invocation spec shared by the renderer and the muxer.
struct CommandBackend {
    std::string backend = "null";  // null | scripted | external
    std::string command;           // template, see debugger/renderer.hpp
    double timeout_s = 120.0;

    bool operator==(const CommandBackend&) const = default;
};

struct PipelineConfig {
    double target_duration_s = 300.0;
    double words_per_minute_default = 160.0;
    FrameSpec frame;
    int page_density_max = 8;
    int retry_threshold = 3;
    double margin_u = 0.1;
    std::int64_t seed = 0;
    std::string voice_id = "default";
    std::string dialect = "manim-ce";

    int segment_budget_words = 1200;
    double cell_u = 0.25;
    int parallelism = 4;
    bool review_enabled = false;
    int llm_max_attempts = 3;
    double rate_limit_rpm = 0.0;  // 0 disables admission control
    std::string tts_backend = "mock";  // mock | service
    CommandBackend renderer;
    CommandBackend muxer;

    bool operator==(const PipelineConfig&) const = default;
};

struct Concept {
    std::string id;
    std::string title;
    std::string one_line_gist;
    std::vector<std::string> depends_on;

    bool operator==(const Concept&) const = default;
};

struct Skeleton {
    std::vector<Concept> concepts;

    bool operator==(const Skeleton&) const = default;
};

struct ManuscriptSection {
    std::string concept_id;
    std::string heading;
    std::string body;
    std::vector<std::string> formal_expressions;
    std::vector<std::string> examples;

    bool operator==(const ManuscriptSection&) const = default;
};

struct Manuscript {
    std::vector<ManuscriptSection> sections;
    std::int64_t word_count = 0;  // derived, see recount()

    // Recomputes word_count from the section bodies.
    Manuscript& recount();
    bool operator==(const Manuscript&) const = default;
};

// Half-open range [begin, end) over manuscript section indices.
struct SectionSpan {
    int begin = 0;
    int end = 0;

    bool empty() const { return end <= begin; }
    int size() const { return end - begin; }
    bool contains(const SectionSpan& other) const {
        return other.begin >= begin && other.end <= end;
    }
    bool operator==(const SectionSpan&) const = default;
};

struct Segment {
    int index = 0;
    SectionSpan section_span;
    std::string text;

    bool operator==(const Segment&) const = default;
};

enum class VisualIntentKind { formula, diagram, image_placeholder, table, plain_text };

struct VisualIntent {
    VisualIntentKind kind = VisualIntentKind::plain_text;
    std::string payload;

    bool operator==(const VisualIntent&) const = default;
};

struct PageBlueprint {
    int page_index = 0;
    std::string title;
    std::vector<std::string> bullet_points;
    std::vector<VisualIntent> visual_intents;
    SectionSpan source_span;
    int est_density = 0;

    bool operator==(const PageBlueprint&) const = default;
};

struct BBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 1.0;
    double h = 1.0;

    double left() const { return cx - w / 2; }
    double right() const { return cx + w / 2; }
    double top() const { return cy + h / 2; }
    double bottom() const { return cy - h / 2; }
    bool operator==(const BBox&) const = default;
};

enum class ElementKind { text, formula, shape, image_placeholder, group };

struct SceneElement {
    std::string id;
    ElementKind kind = ElementKind::text;
    std::string content;
    BBox bbox;
    std::map<std::string, std::string> style;
    std::vector<std::string> children;

    bool operator==(const SceneElement&) const = default;
};

enum class EventVerb { appear, transform, highlight, disappear, wait };

struct AnimationEvent {
    std::string anchor_id;
    EventVerb verb = EventVerb::appear;
    std::vector<std::string> target_ids;
    double duration_s = 0.0;
    std::optional<double> start_s;

    bool operator==(const AnimationEvent&) const = default;
};

// Ordered; a scene only ever moves forward through these.
enum class SceneStage { generated, synced, debugged, laid_out, final_ };

struct SceneProgram {
    int page_index = 0;
    std::vector<SceneElement> elements;
    std::vector<AnimationEvent> events;
    std::string source_text;
    SceneStage stage = SceneStage::generated;

    const SceneElement* find_element(const std::string& id) const;
    SceneElement* find_element(const std::string& id);
    const AnimationEvent* find_event(const std::string& anchor_id) const;
    bool operator==(const SceneProgram&) const = default;
};

struct NarrationUnit {
    std::string unit_id;
    std::string text;
    std::optional<std::string> anchor_ref;

    bool operator==(const NarrationUnit&) const = default;
};

struct NarrationScript {
    int page_index = 0;
    std::vector<NarrationUnit> units;

    std::int64_t word_count() const;
    bool operator==(const NarrationScript&) const = default;
};

struct AudioAsset {
    int page_index = 0;
    std::optional<std::string> media_ref;  // empty for mock synthesis
    double duration_s = 0.0;
    double speaking_rate = 0.0;  // words per second

    bool operator==(const AudioAsset&) const = default;
};

struct SynthesisResult {
    AudioAsset audio;
    std::vector<double> per_unit_durations_s;

    bool operator==(const SynthesisResult&) const = default;
};

enum class FrameEdge { left, right, top, bottom };

struct Overlap {
    std::string a;
    std::string b;
    double overlap_area_u2 = 0.0;

    bool operator==(const Overlap&) const = default;
};

struct Overflow {
    std::string element_id;
    std::vector<FrameEdge> violated_edges;  // in enum order
    double excess_u = 0.0;

    bool operator==(const Overflow&) const = default;
};

struct ConflictReport {
    int page_index = 0;
    std::vector<Overlap> overlaps;
    std::vector<Overflow> overflows;

    bool empty() const { return overlaps.empty() && overflows.empty(); }
    std::size_t conflict_count() const { return overlaps.size() + overflows.size(); }
    bool operator==(const ConflictReport&) const = default;
};

enum class ScanOrder { horizontal_right_then_vertical_down };

struct PlacementMove {
    std::string element_id;
    BBox new_bbox;

    bool operator==(const PlacementMove&) const = default;
};

struct PlacementPlan {
    std::vector<PlacementMove> moves;  // in processing order
    std::vector<std::string> unresolved;

    bool operator==(const PlacementPlan&) const = default;
};

struct ElementEdit {
    std::string element_id;
    std::optional<BBox> new_bbox;
    std::optional<std::string> new_content;
    bool del = false;

    bool operator==(const ElementEdit&) const = default;
};

struct EditSet {
    int page_index = 0;
    std::vector<ElementEdit> edits;
    std::string editor;
    std::string timestamp;

    bool operator==(const EditSet&) const = default;
};

struct VideoSegment {
    int page_index = 0;
    std::string video_ref;
    std::string audio_ref;
    double duration_s = 0.0;

    bool operator==(const VideoSegment&) const = default;
};

struct VideoArtifact {
    std::vector<VideoSegment> segments;
    std::optional<std::string> merged_ref;

    double total_duration_s() const;
    bool operator==(const VideoArtifact&) const = default;
};

struct PipelineOutput {
    VideoArtifact video_plan;
    std::vector<NarrationScript> lecture_scripts;
    Manuscript manuscript;

    bool operator==(const PipelineOutput&) const = default;
};

// Enum <-> canonical name. from_name throws SchemaError on unknown names.
std::string to_name(AudienceLevel v);
std::string to_name(VisualIntentKind v);
std::string to_name(ElementKind v);
std::string to_name(EventVerb v);
std::string to_name(SceneStage v);
std::string to_name(FrameEdge v);
std::string to_name(ScanOrder v);

template <class E>
E from_name(const std::string& name);

}  // namespace lectern
