#include "lectern/narrator/narrator.hpp"

#include <cmath>

#include "lectern/core/errors.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/validate.hpp"
#include "lectern/core/words.hpp"

namespace lectern::narrator {

std::vector<NarrationUnit> look_back(const std::optional<NarrationScript>& prev) {
    if (!prev) return {};
    const auto& u = prev->units;
    const std::size_t from = u.size() > kLookBackUnits ? u.size() - kLookBackUnits : 0;
    return {u.begin() + static_cast<std::ptrdiff_t>(from), u.end()};
}

NarrationRequest build_narration_request(const PageBlueprint& page, const SceneProgram& scene,
                                         const std::optional<NarrationScript>& prev, const std::string& language) {
    Json anchors = Json::array();
    std::string anchor_lines;
    for (const auto& ev : scene.events) {
        Json a = {{"anchor_id", ev.anchor_id}, {"verb", to_name(ev.verb)}, {"kind", ""}, {"content", ""}, {"role", ""}};
        if (!ev.target_ids.empty()) {
            if (const auto* e = scene.find_element(ev.target_ids.front())) {
                a["kind"] = to_name(e->kind);
                a["content"] = e->content;
                auto it = e->style.find("role");
                if (it != e->style.end()) a["role"] = it->second;
            }
        }
        anchor_lines += "- " + ev.anchor_id + " (" + to_name(ev.verb) + " " + a["content"].get<std::string>() + ")\n";
        anchors.push_back(std::move(a));
    }
    Json previous = Json::array();
    std::string previous_text;
    for (const auto& u : look_back(prev)) {
        previous.push_back(u.text);
        previous_text += u.text + "\n";
    }
    std::string bullets;
    for (const auto& b : page.bullet_points) bullets += "- " + b + "\n";
    NarrationRequest r;
    r.input = {{"page_index", page.page_index}, {"title", page.title},     {"bullets", page.bullet_points},
               {"anchors", anchors},            {"previous", previous},    {"language", language}};
    r.prompt = gateway::render_prompt("narrator/narrate", {{"language", language},
                                                           {"previous", previous_text.empty() ? "(start of lecture)\n"
                                                                                              : previous_text},
                                                           {"page_index", std::to_string(page.page_index)},
                                                           {"title", page.title},
                                                           {"bullets", bullets},
                                                           {"anchors", anchor_lines}});
    return r;
}

NarrationScript compose_narration(const PageBlueprint& page, const SceneProgram& scene,
                                  const std::optional<NarrationScript>& prev, const std::string& language,
                                  gateway::LlmClient& llm) {
    const auto req = build_narration_request(page, scene, prev, language);
    auto build = [&](const Json& j) {
        NarrationScript s;
        s.page_index = page.page_index;
        s.units = j.at("units").get<std::vector<NarrationUnit>>();
        return s;
    };
    auto check = [&](const Json& j) {
        const auto s = build(j);
        if (s.units.empty()) throw SchemaError("narration has no units");
        const auto v = validate_narration(s, scene);
        if (!v.empty()) throw SchemaError(v.front().code + ": " + v.front().message);
    };
    try {
        return build(llm.complete("narrator.narrate", req.prompt, req.input, check));
    } catch (const gateway::LlmSchemaFailure& e) {
        throw NarrateError("page " + std::to_string(page.page_index) + ": " + e.what(), e.detail());
    }
}

MockTts::MockTts(double words_per_minute) : wpm_(words_per_minute) {
    if (!(wpm_ > 0)) throw ConfigError("mock tts needs a positive words-per-minute rate");
}

SynthesisResult MockTts::synthesize(const NarrationScript& script, const std::string&, const std::string&) {
    SynthesisResult r;
    r.audio.page_index = script.page_index;
    // t(k) = 60 * words_before_k / wpm, rounded to the micro grid.
    auto boundary = [&](std::int64_t words) {
        return static_cast<std::int64_t>(std::llround(static_cast<double>(words) * 60e6 / wpm_));
    };
    std::int64_t words = 0;
    std::int64_t last = 0;
    for (const auto& u : script.units) {
        words += count_words(u.text);
        const std::int64_t b = boundary(words);
        r.per_unit_durations_s.push_back(from_micro(b - last));
        last = b;
    }
    r.audio.duration_s = from_micro(last);
    r.audio.speaking_rate = wpm_ / 60.0;
    return r;
}

ServiceTts::ServiceTts(gateway::Gateway& gateway, gateway::RetryPolicy policy)
    : gateway_(gateway), policy_(policy) {}

std::string ServiceTts::request_payload(const NarrationScript& script, const std::string& voice_id,
                                        const std::string& language) {
    Json units = Json::array();
    std::string text;
    for (const auto& u : script.units) {
        units.push_back({{"unit_id", u.unit_id}, {"text", u.text}});
        text += (text.empty() ? "" : " ") + u.text;
    }
    return canonical_dump({{"text", text}, {"voice_id", voice_id}, {"language", language}, {"units", units}});
}

SynthesisResult ServiceTts::synthesize(const NarrationScript& script, const std::string& voice_id,
                                       const std::string& language) {
    gateway::ServiceRequest req{gateway::ServiceKind::tts, request_payload(script, voice_id, language), "narrator.tts"};
    std::string payload;
    try {
        payload = gateway_.call(req, policy_).payload;
    } catch (const ServiceError& e) {
        throw TtsError(std::string("page ") + std::to_string(script.page_index) + ": " + e.what());
    }
    Json doc = canonical_parse(payload, "tts response");
    return with_schema_errors("tts response", [&] {
        SynthesisResult r;
        r.audio.page_index = script.page_index;
        r.audio.duration_s = quantize(doc.at("duration_s").get<double>());
        for (const auto& d : doc.at("per_unit_durations_s")) r.per_unit_durations_s.push_back(quantize(d.get<double>()));
        const auto& ref = doc.at("media_ref");
        if (!ref.is_null()) r.audio.media_ref = ref.get<std::string>();
        return r;
    });
}

SynthesisResult synthesize(const NarrationScript& script, const std::string& voice_id, const std::string& language,
                           TtsBackend& backend) {
    SynthesisResult r = backend.synthesize(script, voice_id, language);
    if (r.per_unit_durations_s.size() != script.units.size())
        throw TtsError("tts returned " + std::to_string(r.per_unit_durations_s.size()) + " unit durations for " +
                       std::to_string(script.units.size()) + " units");
    double sum = 0.0;
    std::int64_t sum_micro = 0;
    for (double d : r.per_unit_durations_s) {
        if (!(d >= 0)) throw TtsError("tts returned a negative unit duration");
        sum += d;
        sum_micro += to_micro(d);
    }
    if (!(r.audio.duration_s >= 0)) throw TtsError("tts returned a negative duration");
    if (std::abs(sum - r.audio.duration_s) > 1e-6 && sum_micro != to_micro(r.audio.duration_s))
        throw TtsError("unit durations sum to " + format_real(sum) + " s but the audio lasts " +
                       format_real(r.audio.duration_s) + " s");
    r.audio.page_index = script.page_index;
    const auto words = script.word_count();
    if (r.audio.duration_s > 0) r.audio.speaking_rate = static_cast<double>(words) / r.audio.duration_s;
    return r;
}

}  // namespace lectern::narrator
