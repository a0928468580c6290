#include "lectern/paginator/paginator.hpp"

#include "lectern/core/errors.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/validate.hpp"
#include "lectern/core/words.hpp"

namespace lectern::paginator {

std::string section_text(const ManuscriptSection& section) {
    return "# " + section.heading + "\n\n" + section.body + "\n\n";
}

std::string manuscript_text(const Manuscript& manuscript) {
    std::string out;
    for (const auto& s : manuscript.sections) out += section_text(s);
    return out;
}

std::vector<Segment> segment(const Manuscript& manuscript, int max_words) {
    if (max_words < 1) throw SegmentError("segment word budget must be >= 1");
    const int n = static_cast<int>(manuscript.sections.size());
    std::vector<std::int64_t> words(n);
    for (int i = 0; i < n; ++i) {
        words[i] = count_words(manuscript.sections[i].body);
        if (words[i] > max_words)
            throw SegmentError("section " + std::to_string(i) + " ('" + manuscript.sections[i].concept_id + "') has " +
                               std::to_string(words[i]) + " words, over the budget of " + std::to_string(max_words));
    }
    std::vector<Segment> out;
    int i = 0;
    while (i < n) {
        Segment seg;
        seg.index = static_cast<int>(out.size());
        seg.section_span.begin = i;
        std::int64_t used = 0;
        while (i < n && used + words[i] <= max_words) {
            used += words[i];
            seg.text += section_text(manuscript.sections[i]);
            ++i;
        }
        seg.section_span.end = i;
        out.push_back(std::move(seg));
    }
    return out;
}

void check_segment_pages(const std::vector<PageBlueprint>& pages, const Segment& seg, int density_max) {
    if (pages.empty()) throw SchemaError("segment produced no pages");
    int last_begin = seg.section_span.begin;
    for (const auto& p : pages) {
        validate_blueprint(p, density_max);
        const int actual = static_cast<int>(p.bullet_points.size() + p.visual_intents.size());
        if (actual > density_max)
            throw SchemaError("page '" + p.title + "' carries " + std::to_string(actual) + " items, over the maximum of " +
                              std::to_string(density_max));
        if (!seg.section_span.contains(p.source_span))
            throw SchemaError("page '" + p.title + "' source_span [" + std::to_string(p.source_span.begin) + ", " +
                              std::to_string(p.source_span.end) + ") escapes the segment");
        if (p.source_span.begin < last_begin)
            throw SchemaError("page '" + p.title + "' goes back in the manuscript");
        last_begin = p.source_span.begin;
    }
}

std::vector<PageBlueprint> paginate_segment(const Segment& seg, const Manuscript& manuscript, int density_max,
                                            gateway::LlmClient& llm) {
    Json sections = Json::array();
    for (int i = seg.section_span.begin; i < seg.section_span.end; ++i) {
        const auto& s = manuscript.sections.at(i);
        sections.push_back({{"index", i},
                            {"heading", s.heading},
                            {"body", s.body},
                            {"formal_expressions", s.formal_expressions},
                            {"examples", s.examples}});
    }
    const Json input = {{"segment_index", seg.index},
                        {"span", seg.section_span},
                        {"density_max", density_max},
                        {"sections", sections}};
    const auto prompt = gateway::render_prompt("paginator/paginate",
                                               {{"density_max", std::to_string(density_max)},
                                                {"segment_index", std::to_string(seg.index)},
                                                {"span_begin", std::to_string(seg.section_span.begin)},
                                                {"span_end", std::to_string(seg.section_span.end)},
                                                {"text", seg.text}});
    auto parse = [&](const Json& j) {
        std::vector<PageBlueprint> pages;
        int k = 0;
        for (const auto& pj : j.at("pages")) {
            Json doc = pj;
            doc["page_index"] = ++k;
            pages.push_back(doc.get<PageBlueprint>());
        }
        return pages;
    };
    try {
        Json out = llm.complete("paginator.paginate", prompt, input,
                                [&](const Json& j) { check_segment_pages(parse(j), seg, density_max); });
        return parse(out);
    } catch (const gateway::LlmSchemaFailure& e) {
        throw PaginateError("segment " + std::to_string(seg.index) + ": " + e.what(), e.detail());
    }
}

std::vector<bool> coverage(const std::vector<PageBlueprint>& pages, int section_count) {
    std::vector<bool> covered(static_cast<std::size_t>(std::max(0, section_count)), false);
    for (const auto& p : pages)
        for (int i = std::max(0, p.source_span.begin); i < std::min(section_count, p.source_span.end); ++i)
            covered[i] = true;
    return covered;
}

std::vector<PageBlueprint> aggregate(const std::vector<std::vector<PageBlueprint>>& per_segment, int section_count) {
    const std::string suffix = kContinuedSuffix;
    auto base_title = [&](const std::string& t) {
        if (t.size() >= suffix.size() && t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0)
            return t.substr(0, t.size() - suffix.size());
        return t;
    };
    std::vector<PageBlueprint> out;
    for (const auto& pages : per_segment) {
        for (std::size_t k = 0; k < pages.size(); ++k) {
            PageBlueprint p = pages[k];
            if (k == 0 && !out.empty() && base_title(out.back().title) == p.title) p.title += suffix;
            p.page_index = static_cast<int>(out.size()) + 1;
            out.push_back(std::move(p));
        }
    }
    const auto covered = coverage(out, section_count);
    std::string missing;
    for (int i = 0; i < section_count; ++i)
        if (!covered[i]) missing += (missing.empty() ? "" : ", ") + std::to_string(i);
    if (!missing.empty()) throw AggregateError("sections not covered by any page: " + missing);
    return out;
}

}  // namespace lectern::paginator
