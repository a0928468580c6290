#include "lectern/composer/composer.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "lectern/core/errors.hpp"
#include "lectern/core/parallel.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/validate.hpp"
#include "lectern/core/words.hpp"

namespace lectern::composer {

using gateway::LlmSchemaFailure;
using gateway::render_prompt;

std::string to_name(RefinementKind kind) {
    switch (kind) {
        case RefinementKind::trim_section: return "trim_section";
        case RefinementKind::expand_section: return "expand_section";
        case RefinementKind::no_op: return "no_op";
    }
    return "no_op";
}

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

Skeleton skeletonize(const LectureOutline& outline, gateway::LlmClient& llm) {
    validate_outline(outline);
    const Json input = {{"keywords", outline.topic_keywords},
                        {"audience", to_name(outline.audience_level)},
                        {"language", outline.language},
                        {"notes", outline.free_notes.value_or("")}};
    const auto prompt = render_prompt("composer/skeletonize", {{"language", outline.language},
                                                               {"audience", to_name(outline.audience_level)},
                                                               {"keywords", join(outline.topic_keywords, ", ")},
                                                               {"notes", outline.free_notes.value_or("none")}});
    try {
        Json out = llm.complete("composer.skeletonize", prompt, input,
                                [](const Json& j) { validate_skeleton(j.get<Skeleton>()); });
        return out.get<Skeleton>();
    } catch (const LlmSchemaFailure& e) {
        throw SkeletonError(e.what(), e.detail());
    }
}

Manuscript expand(const Skeleton& skeleton, const LectureOutline& outline, gateway::LlmClient& llm,
                  int parallelism) {
    validate_skeleton(skeleton);
    Manuscript m;
    m.sections.resize(skeleton.concepts.size());
    parallel_for(skeleton.concepts.size(), static_cast<std::size_t>(std::max(1, parallelism)), [&](std::size_t i) {
        const Concept& c = skeleton.concepts[i];
        const Json input = {{"concept", c},
                            {"index", i},
                            {"language", outline.language},
                            {"audience", to_name(outline.audience_level)}};
        const auto prompt = render_prompt("composer/expand", {{"language", outline.language},
                                                              {"audience", to_name(outline.audience_level)},
                                                              {"title", c.title},
                                                              {"concept_id", c.id},
                                                              {"gist", c.one_line_gist},
                                                              {"depends_on", join(c.depends_on, ", ")}});
        auto check = [](const Json& j) {
            if (j.at("body").get<std::string>().empty()) throw SchemaError("section body is empty");
            if (j.at("heading").get<std::string>().empty()) throw SchemaError("section heading is empty");
            j.value("formal_expressions", std::vector<std::string>{});
            j.value("examples", std::vector<std::string>{});
        };
        try {
            Json out = llm.complete("composer.expand", prompt, input, check);
            ManuscriptSection s;
            s.concept_id = c.id;
            s.heading = out.at("heading").get<std::string>();
            s.body = out.at("body").get<std::string>();
            s.formal_expressions = out.value("formal_expressions", std::vector<std::string>{});
            s.examples = out.value("examples", std::vector<std::string>{});
            m.sections[i] = std::move(s);
        } catch (const LlmSchemaFailure& e) {
            throw ExpandError("concept " + std::to_string(i + 1) + " ('" + c.id + "'): " + e.what(), e.detail());
        }
    });
    m.recount();
    return m;
}

double estimate_duration(std::int64_t words, double wpm) {
    if (!(wpm > 0)) throw ValidationError("words per minute must be > 0");
    return static_cast<double>(words) / wpm * 60.0;
}

double estimate_duration(const Manuscript& manuscript, double wpm) {
    return estimate_duration(manuscript.word_count, wpm);
}

std::string first_sentence(const std::string& body) {
    static const std::string ascii_end = ".!?";
    static const std::vector<std::string> wide_end = {"\xE3\x80\x82", "\xEF\xBC\x81", "\xEF\xBC\x9F"};
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (ascii_end.find(body[i]) != std::string::npos) {
            if (i + 1 == body.size() || std::isspace(static_cast<unsigned char>(body[i + 1])))
                return body.substr(0, i + 1);
        }
        for (const auto& w : wide_end)
            if (body.compare(i, w.size(), w) == 0) return body.substr(0, i + w.size());
    }
    return body;
}

RefinementAction plan_refinement(const Manuscript& manuscript, double target_s, double wpm) {
    if (!(target_s > 0)) throw ValidationError("target duration must be > 0");
    RefinementAction none;
    if (manuscript.sections.empty()) return none;
    const double est = estimate_duration(manuscript, wpm);
    if (std::abs(est - target_s) / target_s <= kDurationTolerance) return none;

    const auto target_words = static_cast<std::int64_t>(std::llround(target_s * wpm / 60.0));
    std::int64_t delta = target_words - manuscript.word_count;
    std::vector<std::int64_t> words;
    for (const auto& s : manuscript.sections) words.push_back(count_words(s.body));

    RefinementAction a;
    if (est > target_s) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(words.size()); ++i)
            if (words[i] > words[best]) best = i;
        const std::int64_t keep = count_words(first_sentence(manuscript.sections[best].body));
        const std::int64_t room = words[best] - std::max<std::int64_t>(keep, 1);
        delta = std::max(delta, -room);
        if (delta >= 0) return none;
        a = {RefinementKind::trim_section, best, delta};
    } else {
        int best = 0;
        for (int i = 1; i < static_cast<int>(words.size()); ++i)
            if (words[i] < words[best]) best = i;
        if (delta <= 0) return none;
        a = {RefinementKind::expand_section, best, delta};
    }
    return a;
}

RefineResult refine(const Manuscript& manuscript, double target_s, double wpm, gateway::LlmClient& llm) {
    if (!(target_s > 0)) throw ValidationError("target duration must be > 0");
    RefineResult r;
    Manuscript current = manuscript;
    current.recount();
    r.manuscript = current;
    auto error_of = [&](const Manuscript& m) { return std::abs(estimate_duration(m, wpm) - target_s); };
    double best_error = error_of(current);

    for (;;) {
        if (std::abs(estimate_duration(current, wpm) - target_s) / target_s <= kDurationTolerance) {
            r.converged = true;
            break;
        }
        if (r.iterations >= kMaxRefineIterations) break;
        const RefinementAction action = plan_refinement(current, target_s, wpm);
        if (action.kind == RefinementKind::no_op) break;
        ++r.iterations;
        r.actions.push_back(action);

        auto& section = current.sections[action.section_index];
        const std::int64_t section_words = count_words(section.body);
        const Json input = {{"action", to_name(action.kind)},
                            {"delta_words", action.delta_words_target},
                            {"current_words", section_words},
                            {"heading", section.heading},
                            {"body", section.body},
                            {"section_index", action.section_index}};
        const auto prompt = render_prompt("composer/rewrite", {{"action", to_name(action.kind)},
                                                               {"delta", std::to_string(action.delta_words_target)},
                                                               {"current_words", std::to_string(section_words)},
                                                               {"heading", section.heading},
                                                               {"body", section.body}});
        auto check = [](const Json& j) {
            const auto body = j.at("body").get<std::string>();
            if (count_words(body) < 1) throw SchemaError("rewritten section must keep at least one sentence");
        };
        try {
            Json out = llm.complete("composer.rewrite", prompt, input, check);
            section.body = out.at("body").get<std::string>();
        } catch (const LlmSchemaFailure& e) {
            throw RefineError("section " + std::to_string(action.section_index) + ": " + e.what(), e.detail());
        }
        current.recount();
        const double err = error_of(current);
        if (err < best_error) {
            best_error = err;
            r.manuscript = current;
        }
    }
    if (r.converged) r.manuscript = current;
    r.final_estimate_s = estimate_duration(r.manuscript, wpm);
    return r;
}

}  // namespace lectern::composer
