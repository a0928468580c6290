#include <set>

#include "lectern/codegen/codegen.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/validate.hpp"

namespace lectern::codegen {

void check_generated(const SceneProgram& scene, const PageBlueprint& blueprint) {
    const auto violations = validate_scene(scene);
    if (!violations.empty()) throw SchemaError(violations.front().code + ": " + violations.front().message);
    for (std::size_t i = 0; i < blueprint.visual_intents.size(); ++i) {
        bool mapped = false;
        for (const auto& e : scene.elements) {
            auto it = e.style.find("intent");
            if (it != e.style.end() && it->second == std::to_string(i)) mapped = true;
        }
        if (!mapped) throw SchemaError("visual intent " + std::to_string(i) + " is not realised by any element");
    }
    std::set<std::string> shown;
    for (const auto& ev : scene.events)
        if (ev.verb == EventVerb::appear) shown.insert(ev.target_ids.begin(), ev.target_ids.end());
    for (const auto& e : scene.elements)
        if (!shown.count(e.id)) throw SchemaError("element '" + e.id + "' is never shown by an appear event");
}

SceneProgram generate_scene(const PageBlueprint& blueprint, const FrameSpec& frame, const DialectSpec& d,
                            gateway::LlmClient& llm) {
    Json intents = Json::array();
    std::string intent_lines;
    for (std::size_t i = 0; i < blueprint.visual_intents.size(); ++i) {
        const auto& v = blueprint.visual_intents[i];
        intents.push_back(v);
        intent_lines += std::to_string(i) + ". " + to_name(v.kind) + ": " + v.payload + "\n";
    }
    std::string bullet_lines;
    for (const auto& b : blueprint.bullet_points) bullet_lines += "- " + b + "\n";
    const Json input = {{"page_index", blueprint.page_index},
                        {"title", blueprint.title},
                        {"bullets", blueprint.bullet_points},
                        {"intents", intents},
                        {"frame", frame}};
    const auto prompt = gateway::render_prompt("codegen/scene", {{"page_index", std::to_string(blueprint.page_index)},
                                                                 {"title", blueprint.title},
                                                                 {"bullets", bullet_lines},
                                                                 {"intents", intent_lines.empty() ? "none\n" : intent_lines}});
    auto build = [&](const Json& j) {
        SceneProgram scene;
        scene.page_index = blueprint.page_index;
        scene.elements = j.at("elements").get<std::vector<SceneElement>>();
        scene.events = j.at("events").get<std::vector<AnimationEvent>>();
        for (auto& ev : scene.events) ev.start_s.reset();
        scene.stage = SceneStage::generated;
        return scene;
    };
    try {
        Json out = llm.complete("codegen.scene", prompt, input,
                                [&](const Json& j) { check_generated(build(j), blueprint); });
        SceneProgram scene = build(out);
        scene.source_text = emit(scene, d);
        return scene;
    } catch (const gateway::LlmSchemaFailure& e) {
        throw CodegenError("page " + std::to_string(blueprint.page_index) + ": " + e.what(), e.detail());
    }
}

}  // namespace lectern::codegen
