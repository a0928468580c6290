#include "lectern/core/serialize.hpp"

#include "lectern/core/words.hpp"

namespace lectern {

namespace {

double real_at(const Json& j, const char* key) { return quantize(j.at(key).get<double>()); }

template <class T>
std::optional<T> opt_at(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

template <class E>
E enum_at(const Json& j, const char* key) {
    return from_name<E>(j.at(key).get<std::string>());
}

}  // namespace

Json envelope(const std::string& type, Json value) {
    Json doc = Json::object();
    doc["type"] = type;
    doc["value"] = std::move(value);
    return doc;
}

Json open_envelope(const Json& doc, const std::string& type) {
    if (!doc.is_object() || !doc.contains("type") || !doc.contains("value"))
        throw SchemaError(type + ": document is not a typed envelope");
    const auto& tag = doc.at("type");
    if (!tag.is_string() || tag.get<std::string>() != type)
        throw SchemaError("expected a " + type + " document, found " + tag.dump());
    return doc.at("value");
}

void to_json(Json& j, const LectureOutline& v) {
    j = Json{{"topic_keywords", v.topic_keywords},
             {"audience_level", to_name(v.audience_level)},
             {"language", v.language}};
    if (v.free_notes) j["free_notes"] = *v.free_notes;
}

void from_json(const Json& j, LectureOutline& v) {
    v.topic_keywords = j.at("topic_keywords").get<std::vector<std::string>>();
    v.audience_level = enum_at<AudienceLevel>(j, "audience_level");
    v.language = j.at("language").get<std::string>();
    v.free_notes = opt_at<std::string>(j, "free_notes");
}

void to_json(Json& j, const FrameSpec& v) {
    j = Json{{"width_u", v.width_u}, {"height_u", v.height_u}};
}

void from_json(const Json& j, FrameSpec& v) {
    v.width_u = real_at(j, "width_u");
    v.height_u = real_at(j, "height_u");
}

void to_json(Json& j, const CommandBackend& v) {
    j = Json{{"backend", v.backend}, {"command", v.command}, {"timeout_s", v.timeout_s}};
}

void from_json(const Json& j, CommandBackend& v) {
    CommandBackend d;
    v.backend = j.value("backend", d.backend);
    v.command = j.value("command", d.command);
    v.timeout_s = quantize(j.value("timeout_s", d.timeout_s));
}

void to_json(Json& j, const PipelineConfig& v) {
    j = Json{{"target_duration_s", v.target_duration_s},
             {"words_per_minute_default", v.words_per_minute_default},
             {"frame", v.frame},
             {"page_density_max", v.page_density_max},
             {"retry_threshold", v.retry_threshold},
             {"margin_u", v.margin_u},
             {"seed", v.seed},
             {"voice_id", v.voice_id},
             {"dialect", v.dialect},
             {"segment_budget_words", v.segment_budget_words},
             {"cell_u", v.cell_u},
             {"parallelism", v.parallelism},
             {"review_enabled", v.review_enabled},
             {"llm_max_attempts", v.llm_max_attempts},
             {"rate_limit_rpm", v.rate_limit_rpm},
             {"tts_backend", v.tts_backend},
             {"renderer", v.renderer},
             {"muxer", v.muxer}};
}

// Config documents may be partial: every missing key keeps its default.
void from_json(const Json& j, PipelineConfig& v) {
    PipelineConfig d;
    auto real = [&](const char* key, double def) {
        return j.contains(key) ? real_at(j, key) : def;
    };
    v.target_duration_s = real("target_duration_s", d.target_duration_s);
    v.words_per_minute_default = real("words_per_minute_default", d.words_per_minute_default);
    v.frame = j.contains("frame") ? j.at("frame").get<FrameSpec>() : d.frame;
    v.page_density_max = j.value("page_density_max", d.page_density_max);
    v.retry_threshold = j.value("retry_threshold", d.retry_threshold);
    v.margin_u = real("margin_u", d.margin_u);
    v.seed = j.value("seed", d.seed);
    v.voice_id = j.value("voice_id", d.voice_id);
    v.dialect = j.value("dialect", d.dialect);
    v.segment_budget_words = j.value("segment_budget_words", d.segment_budget_words);
    v.cell_u = real("cell_u", d.cell_u);
    v.parallelism = j.value("parallelism", d.parallelism);
    v.review_enabled = j.value("review_enabled", d.review_enabled);
    v.llm_max_attempts = j.value("llm_max_attempts", d.llm_max_attempts);
    v.rate_limit_rpm = real("rate_limit_rpm", d.rate_limit_rpm);
    v.tts_backend = j.value("tts_backend", d.tts_backend);
    v.renderer = j.contains("renderer") ? j.at("renderer").get<CommandBackend>() : d.renderer;
    v.muxer = j.contains("muxer") ? j.at("muxer").get<CommandBackend>() : d.muxer;
}

void to_json(Json& j, const Concept& v) {
    j = Json{{"id", v.id},
             {"title", v.title},
             {"one_line_gist", v.one_line_gist},
             {"depends_on", v.depends_on}};
}

void from_json(const Json& j, Concept& v) {
    v.id = j.at("id").get<std::string>();
    v.title = j.at("title").get<std::string>();
    v.one_line_gist = j.at("one_line_gist").get<std::string>();
    v.depends_on = j.value("depends_on", std::vector<std::string>{});
}

void to_json(Json& j, const Skeleton& v) { j = Json{{"concepts", v.concepts}}; }

void from_json(const Json& j, Skeleton& v) {
    v.concepts = j.at("concepts").get<std::vector<Concept>>();
}

void to_json(Json& j, const ManuscriptSection& v) {
    j = Json{{"concept_id", v.concept_id},
             {"heading", v.heading},
             {"body", v.body},
             {"formal_expressions", v.formal_expressions},
             {"examples", v.examples}};
}

void from_json(const Json& j, ManuscriptSection& v) {
    v.concept_id = j.at("concept_id").get<std::string>();
    v.heading = j.at("heading").get<std::string>();
    v.body = j.at("body").get<std::string>();
    v.formal_expressions = j.value("formal_expressions", std::vector<std::string>{});
    v.examples = j.value("examples", std::vector<std::string>{});
}

void to_json(Json& j, const Manuscript& v) {
    j = Json{{"sections", v.sections}, {"word_count", v.word_count}};
}

void from_json(const Json& j, Manuscript& v) {
    v.sections = j.at("sections").get<std::vector<ManuscriptSection>>();
    v.word_count = j.at("word_count").get<std::int64_t>();
    Manuscript check = v;
    if (check.recount().word_count != v.word_count)
        throw SchemaError("Manuscript: stored word_count " + std::to_string(v.word_count) +
                          " != recomputed " + std::to_string(check.word_count));
}

void to_json(Json& j, const SectionSpan& v) { j = Json::array({v.begin, v.end}); }

void from_json(const Json& j, SectionSpan& v) {
    if (!j.is_array() || j.size() != 2) throw SchemaError("section span must be [begin, end]");
    v.begin = j.at(0).get<int>();
    v.end = j.at(1).get<int>();
    if (v.begin < 0 || v.end < v.begin) throw SchemaError("malformed section span");
}

void to_json(Json& j, const Segment& v) {
    j = Json{{"index", v.index}, {"section_span", v.section_span}, {"text", v.text}};
}

void from_json(const Json& j, Segment& v) {
    v.index = j.at("index").get<int>();
    v.section_span = j.at("section_span").get<SectionSpan>();
    v.text = j.at("text").get<std::string>();
}

void to_json(Json& j, const VisualIntent& v) {
    j = Json{{"kind", to_name(v.kind)}, {"payload", v.payload}};
}

void from_json(const Json& j, VisualIntent& v) {
    v.kind = enum_at<VisualIntentKind>(j, "kind");
    v.payload = j.at("payload").get<std::string>();
}

void to_json(Json& j, const PageBlueprint& v) {
    j = Json{{"page_index", v.page_index},
             {"title", v.title},
             {"bullet_points", v.bullet_points},
             {"visual_intents", v.visual_intents},
             {"source_span", v.source_span},
             {"est_density", v.est_density}};
}

void from_json(const Json& j, PageBlueprint& v) {
    v.page_index = j.at("page_index").get<int>();
    v.title = j.at("title").get<std::string>();
    v.bullet_points = j.value("bullet_points", std::vector<std::string>{});
    v.visual_intents = j.value("visual_intents", std::vector<VisualIntent>{});
    v.source_span = j.at("source_span").get<SectionSpan>();
    v.est_density = j.at("est_density").get<int>();
}

void to_json(Json& j, const BBox& v) {
    j = Json{{"cx", v.cx}, {"cy", v.cy}, {"w", v.w}, {"h", v.h}};
}

void from_json(const Json& j, BBox& v) {
    v.cx = real_at(j, "cx");
    v.cy = real_at(j, "cy");
    v.w = real_at(j, "w");
    v.h = real_at(j, "h");
    if (!(v.w > 0) || !(v.h > 0)) throw SchemaError("bbox requires w > 0 and h > 0");
}

void to_json(Json& j, const SceneElement& v) {
    j = Json{{"id", v.id},
             {"kind", to_name(v.kind)},
             {"content", v.content},
             {"bbox", v.bbox},
             {"style", Json(v.style)},
             {"children", v.children}};
}

void from_json(const Json& j, SceneElement& v) {
    v.id = j.at("id").get<std::string>();
    v.kind = enum_at<ElementKind>(j, "kind");
    v.content = j.value("content", std::string{});
    v.bbox = j.at("bbox").get<BBox>();
    v.style = j.value("style", std::map<std::string, std::string>{});
    v.children = j.value("children", std::vector<std::string>{});
}

void to_json(Json& j, const AnimationEvent& v) {
    j = Json{{"anchor_id", v.anchor_id},
             {"verb", to_name(v.verb)},
             {"target_ids", v.target_ids},
             {"duration_s", v.duration_s}};
    if (v.start_s) j["start_s"] = *v.start_s;
}

void from_json(const Json& j, AnimationEvent& v) {
    v.anchor_id = j.at("anchor_id").get<std::string>();
    v.verb = enum_at<EventVerb>(j, "verb");
    v.target_ids = j.value("target_ids", std::vector<std::string>{});
    v.duration_s = real_at(j, "duration_s");
    v.start_s = opt_at<double>(j, "start_s");
    if (v.start_s) v.start_s = quantize(*v.start_s);
}

void to_json(Json& j, const SceneProgram& v) {
    j = Json{{"page_index", v.page_index},
             {"elements", v.elements},
             {"events", v.events},
             {"source_text", v.source_text},
             {"stage", to_name(v.stage)}};
}

void from_json(const Json& j, SceneProgram& v) {
    v.page_index = j.at("page_index").get<int>();
    v.elements = j.at("elements").get<std::vector<SceneElement>>();
    v.events = j.at("events").get<std::vector<AnimationEvent>>();
    v.source_text = j.value("source_text", std::string{});
    v.stage = enum_at<SceneStage>(j, "stage");
}

void to_json(Json& j, const NarrationUnit& v) {
    j = Json{{"unit_id", v.unit_id}, {"text", v.text}};
    if (v.anchor_ref) j["anchor_ref"] = *v.anchor_ref;
}

void from_json(const Json& j, NarrationUnit& v) {
    v.unit_id = j.at("unit_id").get<std::string>();
    v.text = j.at("text").get<std::string>();
    v.anchor_ref = opt_at<std::string>(j, "anchor_ref");
}

void to_json(Json& j, const NarrationScript& v) {
    j = Json{{"page_index", v.page_index}, {"units", v.units}, {"word_count", v.word_count()}};
}

void from_json(const Json& j, NarrationScript& v) {
    v.page_index = j.at("page_index").get<int>();
    v.units = j.at("units").get<std::vector<NarrationUnit>>();
    if (j.contains("word_count") && j.at("word_count").get<std::int64_t>() != v.word_count())
        throw SchemaError("NarrationScript: stored word_count does not match units");
}

void to_json(Json& j, const AudioAsset& v) {
    j = Json{{"page_index", v.page_index},
             {"media_ref", v.media_ref ? Json(*v.media_ref) : Json(nullptr)},
             {"duration_s", v.duration_s},
             {"speaking_rate", v.speaking_rate}};
}

void from_json(const Json& j, AudioAsset& v) {
    v.page_index = j.at("page_index").get<int>();
    v.media_ref = opt_at<std::string>(j, "media_ref");
    v.duration_s = real_at(j, "duration_s");
    v.speaking_rate = real_at(j, "speaking_rate");
}

void to_json(Json& j, const SynthesisResult& v) {
    j = Json{{"audio", v.audio}, {"per_unit_durations_s", v.per_unit_durations_s}};
}

void from_json(const Json& j, SynthesisResult& v) {
    v.audio = j.at("audio").get<AudioAsset>();
    v.per_unit_durations_s.clear();
    for (const auto& d : j.at("per_unit_durations_s")) v.per_unit_durations_s.push_back(quantize(d.get<double>()));
}

void to_json(Json& j, const Overlap& v) {
    j = Json{{"a", v.a}, {"b", v.b}, {"overlap_area_u2", v.overlap_area_u2}};
}

void from_json(const Json& j, Overlap& v) {
    v.a = j.at("a").get<std::string>();
    v.b = j.at("b").get<std::string>();
    v.overlap_area_u2 = real_at(j, "overlap_area_u2");
}

void to_json(Json& j, const Overflow& v) {
    Json edges = Json::array();
    for (auto e : v.violated_edges) edges.push_back(to_name(e));
    j = Json{{"element_id", v.element_id}, {"violated_edges", edges}, {"excess_u", v.excess_u}};
}

void from_json(const Json& j, Overflow& v) {
    v.element_id = j.at("element_id").get<std::string>();
    v.violated_edges.clear();
    for (const auto& e : j.at("violated_edges"))
        v.violated_edges.push_back(from_name<FrameEdge>(e.get<std::string>()));
    v.excess_u = real_at(j, "excess_u");
}

void to_json(Json& j, const ConflictReport& v) {
    j = Json{{"page_index", v.page_index}, {"overlaps", v.overlaps}, {"overflows", v.overflows}};
}

void from_json(const Json& j, ConflictReport& v) {
    v.page_index = j.at("page_index").get<int>();
    v.overlaps = j.at("overlaps").get<std::vector<Overlap>>();
    v.overflows = j.at("overflows").get<std::vector<Overflow>>();
}

void to_json(Json& j, const PlacementMove& v) {
    j = Json{{"element_id", v.element_id}, {"new_bbox", v.new_bbox}};
}

void from_json(const Json& j, PlacementMove& v) {
    v.element_id = j.at("element_id").get<std::string>();
    v.new_bbox = j.at("new_bbox").get<BBox>();
}

void to_json(Json& j, const PlacementPlan& v) {
    j = Json{{"moves", v.moves}, {"unresolved", v.unresolved}};
}

void from_json(const Json& j, PlacementPlan& v) {
    v.moves = j.at("moves").get<std::vector<PlacementMove>>();
    v.unresolved = j.at("unresolved").get<std::vector<std::string>>();
}

void to_json(Json& j, const ElementEdit& v) {
    j = Json{{"element_id", v.element_id}, {"delete", v.del}};
    if (v.new_bbox) j["new_bbox"] = *v.new_bbox;
    if (v.new_content) j["new_content"] = *v.new_content;
}

void from_json(const Json& j, ElementEdit& v) {
    v.element_id = j.at("element_id").get<std::string>();
    v.new_bbox = opt_at<BBox>(j, "new_bbox");
    v.new_content = opt_at<std::string>(j, "new_content");
    v.del = j.value("delete", false);
}

void to_json(Json& j, const EditSet& v) {
    j = Json{{"page_index", v.page_index},
             {"edits", v.edits},
             {"editor", v.editor},
             {"timestamp", v.timestamp}};
}

void from_json(const Json& j, EditSet& v) {
    v.page_index = j.at("page_index").get<int>();
    v.edits = j.at("edits").get<std::vector<ElementEdit>>();
    v.editor = j.value("editor", std::string{});
    v.timestamp = j.value("timestamp", std::string{});
}

void to_json(Json& j, const VideoSegment& v) {
    j = Json{{"page_index", v.page_index},
             {"video_ref", v.video_ref},
             {"audio_ref", v.audio_ref},
             {"duration_s", v.duration_s}};
}

void from_json(const Json& j, VideoSegment& v) {
    v.page_index = j.at("page_index").get<int>();
    v.video_ref = j.at("video_ref").get<std::string>();
    v.audio_ref = j.at("audio_ref").get<std::string>();
    v.duration_s = real_at(j, "duration_s");
}

void to_json(Json& j, const VideoArtifact& v) {
    j = Json{{"segments", v.segments}, {"total_duration_s", v.total_duration_s()}};
    if (v.merged_ref) j["merged_ref"] = *v.merged_ref;
}

void from_json(const Json& j, VideoArtifact& v) {
    v.segments = j.at("segments").get<std::vector<VideoSegment>>();
    v.merged_ref = opt_at<std::string>(j, "merged_ref");
}

void to_json(Json& j, const PipelineOutput& v) {
    j = Json{{"video_plan", v.video_plan},
             {"lecture_scripts", v.lecture_scripts},
             {"manuscript", v.manuscript}};
}

void from_json(const Json& j, PipelineOutput& v) {
    v.video_plan = j.at("video_plan").get<VideoArtifact>();
    v.lecture_scripts = j.at("lecture_scripts").get<std::vector<NarrationScript>>();
    v.manuscript = j.at("manuscript").get<Manuscript>();
}

}  // namespace lectern
