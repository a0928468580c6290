#include "lectern/debugger/debugger.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "lectern/core/errors.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/validate.hpp"

namespace lectern::debugger {

namespace {

constexpr const char* kTemplateStyle = "template";

bool is_package_path(const std::string& path) {
    return path.find("site-packages") != std::string::npos || path.find("dist-packages") != std::string::npos ||
           (!path.empty() && path.front() == '<');
}

std::string base_name(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

void collect_leaves(const SceneProgram& scene, const std::string& id, std::vector<std::string>& out, int depth = 0) {
    const SceneElement* e = scene.find_element(id);
    if (!e || depth > static_cast<int>(scene.elements.size())) return;
    if (e->kind != ElementKind::group) {
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
        return;
    }
    for (const auto& c : e->children) collect_leaves(scene, c, out, depth + 1);
}

std::vector<std::string> all_leaves(const SceneProgram& scene) {
    std::vector<std::string> out;
    for (const auto& e : scene.elements)
        if (e.kind != ElementKind::group) out.push_back(e.id);
    return out;
}

void finish(SceneProgram& scene, const codegen::DialectSpec& dialect) {
    scene.source_text = codegen::emit(scene, dialect);
}

std::vector<std::string> changed_ids(const SceneProgram& before, const SceneProgram& after) {
    std::vector<std::string> out;
    for (const auto& e : after.elements) {
        const SceneElement* old = before.find_element(e.id);
        if (!old || !(*old == e)) out.push_back(e.id);
    }
    return out;
}

}  // namespace

std::string to_name(AttemptOutcome o) { return o == AttemptOutcome::ok ? "ok" : "error"; }
std::string to_name(FinalOutcome o) { return o == FinalOutcome::ok ? "ok" : "fallback"; }

int DebugTrace::repairs() const {
    const auto errors = std::count_if(attempts.begin(), attempts.end(),
                                      [](const RenderAttempt& a) { return a.outcome == AttemptOutcome::error; });
    return static_cast<int>(errors) - (final_outcome == FinalOutcome::fallback ? 1 : 0);
}

Json to_json(const DebugTrace& trace) {
    Json attempts = Json::array();
    for (const auto& a : trace.attempts) {
        attempts.push_back({{"attempt_index", a.attempt_index},
                            {"outcome", to_name(a.outcome)},
                            {"error_trace", a.error_trace ? Json(*a.error_trace) : Json(nullptr)},
                            {"repaired_element_ids", a.repaired_element_ids}});
    }
    Json subs = Json::array();
    for (const auto& s : trace.fallback_substitutions)
        subs.push_back({{"element_id", s.element_id}, {"template_name", s.template_name}});
    return {{"attempts", attempts}, {"final_outcome", to_name(trace.final_outcome)}, {"fallback_substitutions", subs}};
}

DebugTrace debug_trace_from_json(const Json& j) {
    return with_schema_errors("DebugTrace", [&] {
        DebugTrace t;
        for (const auto& a : j.at("attempts")) {
            RenderAttempt r;
            r.attempt_index = a.at("attempt_index").get<int>();
            const auto outcome = a.at("outcome").get<std::string>();
            if (outcome != "ok" && outcome != "error") throw SchemaError("unknown attempt outcome '" + outcome + "'");
            r.outcome = outcome == "ok" ? AttemptOutcome::ok : AttemptOutcome::error;
            if (!a.at("error_trace").is_null()) r.error_trace = a.at("error_trace").get<std::string>();
            if (r.error_trace.has_value() != (r.outcome == AttemptOutcome::error))
                throw SchemaError("error_trace must be present exactly for failed attempts");
            r.repaired_element_ids = a.at("repaired_element_ids").get<std::vector<std::string>>();
            t.attempts.push_back(std::move(r));
        }
        const auto final_outcome = j.at("final_outcome").get<std::string>();
        if (final_outcome != "ok" && final_outcome != "fallback")
            throw SchemaError("unknown final outcome '" + final_outcome + "'");
        t.final_outcome = final_outcome == "ok" ? FinalOutcome::ok : FinalOutcome::fallback;
        for (const auto& s : j.at("fallback_substitutions"))
            t.fallback_substitutions.push_back(
                {s.at("element_id").get<std::string>(), s.at("template_name").get<std::string>()});
        if (t.fallback_substitutions.empty() == (t.final_outcome == FinalOutcome::fallback))
            throw SchemaError("fallback_substitutions must be non-empty exactly for a fallback outcome");
        return t;
    });
}

std::optional<int> error_line(const std::string& error_trace, const std::string& source_file) {
    static const std::regex frame_re(R"re(File "([^"]*)", line (\d+))re");
    std::optional<int> in_source, outside_packages, any_frame;
    for (auto it = std::sregex_iterator(error_trace.begin(), error_trace.end(), frame_re); it != std::sregex_iterator();
         ++it) {
        const std::string path = (*it)[1].str();
        const int line = std::stoi((*it)[2].str());
        any_frame = line;
        if (!source_file.empty() && base_name(path) == base_name(source_file)) in_source = line;
        if (!is_package_path(path)) outside_packages = line;
    }
    if (in_source) return in_source;
    if (!source_file.empty() && any_frame && !outside_packages) return std::nullopt;
    if (outside_packages) return outside_packages;
    static const std::regex bare_re(R"(\bline (\d+))");
    std::optional<int> bare;
    for (auto it = std::sregex_iterator(error_trace.begin(), error_trace.end(), bare_re); it != std::sregex_iterator();
         ++it)
        bare = std::stoi((*it)[1].str());
    return bare;
}

std::optional<std::string> localize(const std::string& source, const std::string& error_trace,
                                    const std::string& source_file) {
    const auto line = error_line(error_trace, source_file);
    if (!line) return std::nullopt;
    std::optional<std::string> best;
    for (const auto& hit : codegen::scan_markers(source)) {
        if (hit.line > *line) break;
        best = hit.anchor_id;
    }
    return best;
}

std::vector<std::string> fragment_ids(const SceneProgram& scene, const std::string& anchor_id) {
    std::vector<std::string> out;
    const AnimationEvent* ev = scene.find_event(anchor_id);
    if (!ev) return out;
    for (const auto& t : ev->target_ids) {
        const SceneElement* e = scene.find_element(t);
        if (!e) continue;
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        if (e->kind == ElementKind::group) collect_leaves(scene, t, out);
    }
    return out;
}

RepairResult repair(const SceneProgram& scene, const std::string& error_trace, const codegen::DialectSpec& dialect,
                    gateway::LlmClient& llm, const std::string& source_file) {
    if (error_trace.empty()) throw ValidationError("repair needs a non-empty error trace");
    RepairResult result;
    std::string scope = "scene";
    if (auto anchor = localize(scene.source_text, error_trace, source_file)) {
        result.element_ids = fragment_ids(scene, *anchor);
        if (!result.element_ids.empty()) {
            result.localized = true;
            scope = "anchor:" + *anchor;
        }
    }
    if (!result.localized)
        for (const auto& e : scene.elements) result.element_ids.push_back(e.id);

    Json fragment = Json::array();
    for (const auto& id : result.element_ids) fragment.push_back(Json(*scene.find_element(id)));
    const Json input = {{"scope", scope}, {"error", error_trace}, {"elements", fragment}};
    const auto prompt = gateway::render_prompt(
        "debugger/repair", {{"scope", scope}, {"error", error_trace}, {"fragment", canonical_dump(fragment)}});

    SceneProgram repaired;
    const std::vector<std::string> scoped = result.element_ids;
    auto splice = [&](const Json& answer) {
        SceneProgram next = scene;
        std::map<std::string, SceneElement> by_id;
        for (const auto& e : answer.at("elements")) {
            SceneElement el = e.get<SceneElement>();
            if (std::find(scoped.begin(), scoped.end(), el.id) == scoped.end())
                throw SchemaError("repair returned element '" + el.id + "' outside its scope");
            if (!by_id.emplace(el.id, std::move(el)).second) throw SchemaError("repair returned a duplicate element");
        }
        if (by_id.size() != scoped.size()) throw SchemaError("repair must return every scoped element");
        for (auto& e : next.elements) {
            auto it = by_id.find(e.id);
            if (it != by_id.end()) e = it->second;
        }
        const auto violations = validate_scene(next);
        if (!violations.empty()) throw SchemaError("repaired scene is invalid: " + violations.front().message);
        return next;
    };
    const Json answer = llm.complete("debugger.repair", prompt, input, [&](const Json& a) { splice(a); });
    result.scene = with_schema_errors("debugger.repair", [&] { return splice(answer); });
    finish(result.scene, dialect);
    return result;
}

std::string template_name(ElementKind kind) {
    switch (kind) {
        case ElementKind::text:
        case ElementKind::formula: return "plain-text-box";
        case ElementKind::shape: return "labeled-rectangle";
        case ElementKind::image_placeholder: return "gray-labeled-rectangle";
        case ElementKind::group: return "";
    }
    return "";
}

namespace {

ElementKind template_kind(ElementKind kind) {
    return kind == ElementKind::formula ? ElementKind::text : kind;
}

bool is_template_instance(const SceneElement& e) {
    auto it = e.style.find(kTemplateStyle);
    if (it == e.style.end()) return false;
    return it->second == template_name(e.kind) && (e.kind == ElementKind::text || e.kind == ElementKind::shape ||
                                                   e.kind == ElementKind::image_placeholder);
}

}  // namespace

SceneProgram fallback(const SceneProgram& scene, const std::vector<std::string>& failing_ids,
                      const codegen::DialectSpec& dialect, std::vector<Substitution>* substitutions) {
    std::vector<std::string> leaves;
    for (const auto& id : failing_ids) collect_leaves(scene, id, leaves);
    if (leaves.empty()) return scene;

    SceneProgram out = scene;
    std::map<std::string, std::string> renamed;
    for (auto& e : out.elements) {
        if (std::find(leaves.begin(), leaves.end(), e.id) == leaves.end() || is_template_instance(e)) continue;
        std::string id = e.id + std::string(kTemplateSuffix);
        while (out.find_element(id)) id += std::string(kTemplateSuffix);
        const std::string name = template_name(e.kind);
        std::map<std::string, std::string> style{{kTemplateStyle, name}};
        if (auto it = e.style.find("intent"); it != e.style.end()) style.emplace(*it);
        renamed[e.id] = id;
        if (substitutions) substitutions->push_back({e.id, name});
        e = SceneElement{id, template_kind(e.kind), e.content, e.bbox, std::move(style), {}};
    }
    auto retarget = [&](std::vector<std::string>& ids) {
        for (auto& id : ids)
            if (auto it = renamed.find(id); it != renamed.end()) id = it->second;
    };
    for (auto& e : out.elements) retarget(e.children);
    for (auto& ev : out.events) retarget(ev.target_ids);
    finish(out, dialect);
    return out;
}

bool is_fully_templated(const SceneProgram& scene) {
    return std::all_of(scene.elements.begin(), scene.elements.end(),
                       [](const SceneElement& e) { return e.kind == ElementKind::group || is_template_instance(e); });
}

DebugResult run_debug_loop(const SceneProgram& scene, Renderer& renderer, int tau,
                           const codegen::DialectSpec& dialect, gateway::LlmClient& llm) {
    if (tau < 1) throw ConfigError("retry threshold must be >= 1");
    if (scene.stage < SceneStage::synced) throw ValidationError("debug loop needs a synced scene");
    DebugResult result;
    SceneProgram current = scene;
    if (current.source_text.empty()) finish(current, dialect);
    std::vector<std::string> implicated;
    int repairs = 0;
    for (int index = 1;; ++index) {
        const RenderOutcome outcome =
            renderer.render({current.page_index, current.source_text, dialect.name, RenderMode::check, {}});
        RenderAttempt attempt{index, outcome.ok() ? AttemptOutcome::ok : AttemptOutcome::error, std::nullopt, {}};
        if (outcome.ok()) {
            result.trace.attempts.push_back(std::move(attempt));
            result.trace.final_outcome = FinalOutcome::ok;
            break;
        }
        const std::string error = outcome.stderr_text.empty()
                                      ? "renderer exited with status " + std::to_string(outcome.exit_status)
                                      : outcome.stderr_text;
        attempt.error_trace = error;
        if (auto anchor = localize(current.source_text, error, outcome.source_path))
            for (const auto& id : fragment_ids(current, *anchor))
                if (std::find(implicated.begin(), implicated.end(), id) == implicated.end()) implicated.push_back(id);
        if (repairs == tau) {
            result.trace.attempts.push_back(std::move(attempt));
            const auto failing = implicated.empty() ? all_leaves(current) : implicated;
            current = fallback(current, failing, dialect, &result.trace.fallback_substitutions);
            if (result.trace.fallback_substitutions.empty())
                current = fallback(current, all_leaves(current), dialect, &result.trace.fallback_substitutions);
            if (result.trace.fallback_substitutions.empty())
                for (const auto& e : current.elements)
                    if (e.kind != ElementKind::group)
                        result.trace.fallback_substitutions.push_back({e.id, template_name(e.kind)});
            result.trace.final_outcome = FinalOutcome::fallback;
            break;
        }
        ++repairs;
        try {
            RepairResult r = repair(current, error, dialect, llm, outcome.source_path);
            attempt.repaired_element_ids = changed_ids(current, r.scene);
            current = std::move(r.scene);
        } catch (const gateway::LlmSchemaFailure&) {
        } catch (const SchemaError&) {
        }
        result.trace.attempts.push_back(std::move(attempt));
    }
    if (current.stage < SceneStage::debugged) current.stage = SceneStage::debugged;
    finish(current, dialect);
    result.scene = std::move(current);
    return result;
}

}  // namespace lectern::debugger
