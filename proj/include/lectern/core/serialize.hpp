#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/types.hpp"

namespace lectern {

// nlohmann ADL hooks. from_json throws SchemaError (or nlohmann type errors,
// which deserialize() converts) and quantizes every real it reads.
#define LECTERN_JSON_HOOKS(T)            \
    void to_json(Json& j, const T& v);   \
    void from_json(const Json& j, T& v)

LECTERN_JSON_HOOKS(LectureOutline);
LECTERN_JSON_HOOKS(FrameSpec);
LECTERN_JSON_HOOKS(CommandBackend);
LECTERN_JSON_HOOKS(PipelineConfig);
LECTERN_JSON_HOOKS(Concept);
LECTERN_JSON_HOOKS(Skeleton);
LECTERN_JSON_HOOKS(ManuscriptSection);
LECTERN_JSON_HOOKS(Manuscript);
LECTERN_JSON_HOOKS(SectionSpan);
LECTERN_JSON_HOOKS(Segment);
LECTERN_JSON_HOOKS(VisualIntent);
LECTERN_JSON_HOOKS(PageBlueprint);
LECTERN_JSON_HOOKS(BBox);
LECTERN_JSON_HOOKS(SceneElement);
LECTERN_JSON_HOOKS(AnimationEvent);
LECTERN_JSON_HOOKS(SceneProgram);
LECTERN_JSON_HOOKS(NarrationUnit);
LECTERN_JSON_HOOKS(NarrationScript);
LECTERN_JSON_HOOKS(AudioAsset);
LECTERN_JSON_HOOKS(SynthesisResult);
LECTERN_JSON_HOOKS(Overlap);
LECTERN_JSON_HOOKS(Overflow);
LECTERN_JSON_HOOKS(ConflictReport);
LECTERN_JSON_HOOKS(PlacementMove);
LECTERN_JSON_HOOKS(PlacementPlan);
LECTERN_JSON_HOOKS(ElementEdit);
LECTERN_JSON_HOOKS(EditSet);
LECTERN_JSON_HOOKS(VideoSegment);
LECTERN_JSON_HOOKS(VideoArtifact);
LECTERN_JSON_HOOKS(PipelineOutput);

#undef LECTERN_JSON_HOOKS

// Type tag written into the envelope of every serialized document.
template <class T>
struct TypeTag;

#define LECTERN_TYPE_TAG(T)                                   \
    template <>                                               \
    struct TypeTag<T> {                                       \
        static std::string name() { return #T; }              \
    }

LECTERN_TYPE_TAG(LectureOutline);
LECTERN_TYPE_TAG(PipelineConfig);
LECTERN_TYPE_TAG(Skeleton);
LECTERN_TYPE_TAG(Manuscript);
LECTERN_TYPE_TAG(Segment);
LECTERN_TYPE_TAG(PageBlueprint);
LECTERN_TYPE_TAG(SceneProgram);
LECTERN_TYPE_TAG(NarrationScript);
LECTERN_TYPE_TAG(AudioAsset);
LECTERN_TYPE_TAG(SynthesisResult);
LECTERN_TYPE_TAG(ConflictReport);
LECTERN_TYPE_TAG(PlacementPlan);
LECTERN_TYPE_TAG(EditSet);
LECTERN_TYPE_TAG(VideoArtifact);
LECTERN_TYPE_TAG(PipelineOutput);

#undef LECTERN_TYPE_TAG

template <class T>
struct TypeTag<std::vector<T>> {
    static std::string name() { return "list<" + TypeTag<T>::name() + ">"; }
};

// Wraps a value as {"type": <tag>, "value": <json>}.
Json envelope(const std::string& type, Json value);
// Unwraps, checking the tag. Throws SchemaError on mismatch.
Json open_envelope(const Json& doc, const std::string& type);

// Runs `fn`, translating nlohmann type/range errors into SchemaError.
template <class Fn>
auto with_schema_errors(std::string_view what, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Json::exception& e) {
        throw SchemaError(std::string(what) + ": " + e.what());
    }
}

template <class T>
std::string serialize(const T& value) {
    return canonical_dump(envelope(TypeTag<T>::name(), Json(value)));
}

template <class T>
T deserialize(std::string_view text) {
    const std::string type = TypeTag<T>::name();
    Json doc = canonical_parse(text, type);
    return with_schema_errors(type, [&] { return open_envelope(doc, type).template get<T>(); });
}

}  // namespace lectern
