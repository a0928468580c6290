#include "lectern/core/types.hpp"

#include <array>
#include <utility>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/words.hpp"

namespace lectern {

namespace {

template <class E, std::size_t N>
using NameTable = std::array<std::pair<E, const char*>, N>;

constexpr NameTable<AudienceLevel, 3> kAudience{{{AudienceLevel::intro, "intro"},
                                                 {AudienceLevel::intermediate, "intermediate"},
                                                 {AudienceLevel::advanced, "advanced"}}};
constexpr NameTable<VisualIntentKind, 5> kIntent{{{VisualIntentKind::formula, "formula"},
                                                  {VisualIntentKind::diagram, "diagram"},
                                                  {VisualIntentKind::image_placeholder, "image_placeholder"},
                                                  {VisualIntentKind::table, "table"},
                                                  {VisualIntentKind::plain_text, "plain_text"}}};
constexpr NameTable<ElementKind, 5> kElement{{{ElementKind::text, "text"},
                                              {ElementKind::formula, "formula"},
                                              {ElementKind::shape, "shape"},
                                              {ElementKind::image_placeholder, "image_placeholder"},
                                              {ElementKind::group, "group"}}};
constexpr NameTable<EventVerb, 5> kVerb{{{EventVerb::appear, "appear"},
                                         {EventVerb::transform, "transform"},
                                         {EventVerb::highlight, "highlight"},
                                         {EventVerb::disappear, "disappear"},
                                         {EventVerb::wait, "wait"}}};
constexpr NameTable<SceneStage, 5> kStage{{{SceneStage::generated, "generated"},
                                           {SceneStage::synced, "synced"},
                                           {SceneStage::debugged, "debugged"},
                                           {SceneStage::laid_out, "laid_out"},
                                           {SceneStage::final_, "final"}}};
constexpr NameTable<FrameEdge, 4> kEdge{{{FrameEdge::left, "left"},
                                         {FrameEdge::right, "right"},
                                         {FrameEdge::top, "top"},
                                         {FrameEdge::bottom, "bottom"}}};
constexpr NameTable<ScanOrder, 1> kScan{
    {{ScanOrder::horizontal_right_then_vertical_down, "horizontal_right_then_vertical_down"}}};

template <class E, std::size_t N>
std::string lookup_name(const NameTable<E, N>& table, E v) {
    for (const auto& [e, name] : table)
        if (e == v) return name;
    return "?";
}

template <class E, std::size_t N>
E lookup_value(const NameTable<E, N>& table, const std::string& name, const char* what) {
    for (const auto& [e, n] : table)
        if (name == n) return e;
    throw SchemaError(std::string("unknown ") + what + " '" + name + "'");
}

}  // namespace

std::string to_name(AudienceLevel v) { return lookup_name(kAudience, v); }
std::string to_name(VisualIntentKind v) { return lookup_name(kIntent, v); }
std::string to_name(ElementKind v) { return lookup_name(kElement, v); }
std::string to_name(EventVerb v) { return lookup_name(kVerb, v); }
std::string to_name(SceneStage v) { return lookup_name(kStage, v); }
std::string to_name(FrameEdge v) { return lookup_name(kEdge, v); }
std::string to_name(ScanOrder v) { return lookup_name(kScan, v); }

template <>
AudienceLevel from_name<AudienceLevel>(const std::string& n) {
    return lookup_value(kAudience, n, "audience level");
}
template <>
VisualIntentKind from_name<VisualIntentKind>(const std::string& n) {
    return lookup_value(kIntent, n, "visual intent kind");
}
template <>
ElementKind from_name<ElementKind>(const std::string& n) {
    return lookup_value(kElement, n, "element kind");
}
template <>
EventVerb from_name<EventVerb>(const std::string& n) {
    return lookup_value(kVerb, n, "event verb");
}
template <>
SceneStage from_name<SceneStage>(const std::string& n) {
    return lookup_value(kStage, n, "scene stage");
}
template <>
FrameEdge from_name<FrameEdge>(const std::string& n) {
    return lookup_value(kEdge, n, "frame edge");
}
template <>
ScanOrder from_name<ScanOrder>(const std::string& n) {
    return lookup_value(kScan, n, "scan order");
}

Manuscript& Manuscript::recount() {
    word_count = 0;
    for (const auto& s : sections) word_count += count_words(s.body);
    return *this;
}

const SceneElement* SceneProgram::find_element(const std::string& id) const {
    for (const auto& e : elements)
        if (e.id == id) return &e;
    return nullptr;
}

SceneElement* SceneProgram::find_element(const std::string& id) {
    for (auto& e : elements)
        if (e.id == id) return &e;
    return nullptr;
}

const AnimationEvent* SceneProgram::find_event(const std::string& anchor_id) const {
    for (const auto& e : events)
        if (e.anchor_id == anchor_id) return &e;
    return nullptr;
}

std::int64_t NarrationScript::word_count() const {
    std::int64_t n = 0;
    for (const auto& u : units) n += count_words(u.text);
    return n;
}

double VideoArtifact::total_duration_s() const {
    std::int64_t micro = 0;
    for (const auto& s : segments) micro += to_micro(s.duration_s);
    return from_micro(micro);
}

}  // namespace lectern
