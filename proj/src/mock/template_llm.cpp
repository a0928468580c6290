#include "lectern/mock/template_llm.hpp"

#include <cctype>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/words.hpp"
#include "lectern/gateway/llm.hpp"

namespace lectern::mock {

namespace {

std::string slug(const std::string& s, std::size_t index) {
    std::string out;
    for (unsigned char c : s) {
        if (c >= 0x80) return "concept-" + std::to_string(index);
        if (std::isalnum(c)) {
            out += static_cast<char>(std::tolower(c));
        } else if (!out.empty() && out.back() != '-') {
            out += '-';
        }
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? "concept-" + std::to_string(index) : out;
}

std::vector<std::string> sentences(const std::string& body) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < body.size(); ++i) {
        cur += body[i];
        const char c = body[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == body.size() || body[i + 1] == ' ')) {
            out.push_back(cur);
            cur.clear();
            if (i + 1 < body.size()) ++i;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join_sentences(const std::vector<std::string>& s) {
    std::string out;
    for (const auto& x : s) {
        if (!out.empty()) out += ' ';
        out += x;
    }
    return out;
}

std::string shorten(std::string s, std::size_t max_words) {
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.pop_back();
    std::string out;
    std::size_t words = 0, i = 0;
    while (i < s.size() && words < max_words) {
        auto j = s.find(' ', i);
        if (j == std::string::npos) j = s.size();
        if (!out.empty()) out += ' ';
        out += s.substr(i, j - i);
        ++words;
        i = j + 1;
    }
    return out;
}

const std::vector<std::string>& body_bank() {
    static const std::vector<std::string> bank = {
        "{title} is the idea we study in this part of the lecture, and it rests on a simple observation: {gist}",
        "Before writing anything formal, it helps to picture what {title} does on a small example that fits on one slide.",
        "The central quantity is introduced first, then we watch how it changes from one step of the procedure to the next.",
        "Each symbol in the formal statement has a concrete meaning, and we name every one of them before using it.",
        "A common mistake is to memorise the final rule for {title} without understanding which assumption makes it valid.",
        "We therefore state the assumptions explicitly and check them against the example we have been following so far.",
        "When an assumption fails, the behaviour of the method changes, sometimes slowly and sometimes quite dramatically.",
        "A second example, chosen to break one assumption, shows exactly where the reasoning stops working.",
        "Comparing the two examples side by side makes the role of each assumption visible without extra algebra.",
        "In practice, engineers tune {title} by running short experiments and reading the resulting curves carefully.",
        "Those curves tell us whether progress is steady, stalled, or unstable, and each case suggests a different fix.",
        "Finally, we connect {title} to the other ideas of the lecture so that the overall picture stays coherent.",
    };
    return bank;
}

const std::vector<std::string>& filler_bank() {
    static const std::vector<std::string> bank = {
        "To make {heading} concrete, consider one more worked case and follow every step of it slowly.",
        "Notice how each quantity in {heading} moves when we change a single input and hold the rest fixed.",
        "This detail is easy to overlook, yet it explains most of the surprising behaviour students report.",
        "A short recap of {heading} closes the section before we move on to the next topic.",
    };
    return bank;
}

std::string fill(const std::string& tmpl, const std::string& key, const std::string& value) {
    std::string out = tmpl;
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size()))
        out.replace(pos, key.size(), value);
    return out;
}

std::string formula_for(const std::string& title) {
    std::string lower;
    for (unsigned char c : title) lower += static_cast<char>(std::tolower(c));
    if (lower.find("gradient") != std::string::npos) return "x_{t+1} = x_t - \\eta \\nabla f(x_t)";
    if (lower.find("rate") != std::string::npos) return "0 < \\eta < 2 / L";
    if (lower.find("converg") != std::string::npos) return "f(x_t) - f^* \\le \\frac{\\|x_0 - x^*\\|^2}{2 \\eta t}";
    return "\\mathcal{L}(\\theta) = \\frac{1}{n} \\sum_{i=1}^{n} \\ell_i(\\theta)";
}

Json skeletonize(const Json& in) {
    const auto keywords = in.at("keywords").get<std::vector<std::string>>();
    Json concepts = Json::array();
    concepts.push_back({{"id", "intro"},
                        {"title", "Introduction to " + keywords.front()},
                        {"one_line_gist", "why " + keywords.front() + " matters and what problem it solves."},
                        {"depends_on", Json::array()}});
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < keywords.size(); ++i) {
        std::string id = slug(keywords[i], i + 1);
        for (const auto& prev : ids)
            if (prev == id) id += "-" + std::to_string(i + 1);
        if (id == "intro" || id == "summary") id += "-topic";
        ids.push_back(id);
        concepts.push_back({{"id", id},
                            {"title", keywords[i]},
                            {"one_line_gist", keywords[i] + " explained through its definition, a formula and an example."},
                            {"depends_on", Json::array({"intro"})}});
    }
    Json all = Json::array({"intro"});
    for (const auto& id : ids) all.push_back(id);
    concepts.push_back({{"id", "summary"},
                        {"title", "Summary"},
                        {"one_line_gist", "how the pieces fit together."},
                        {"depends_on", all}});
    return {{"concepts", concepts}};
}

Json expand(const Json& in) {
    const Json& c = in.at("concept");
    const std::string id = c.at("id").get<std::string>();
    const std::string title = c.at("title").get<std::string>();
    const std::string gist = c.at("one_line_gist").get<std::string>();
    std::vector<std::string> body;
    for (const auto& s : body_bank()) body.push_back(fill(fill(s, "{title}", title), "{gist}", gist));
    Json formal = Json::array();
    Json examples = Json::array();
    if (id != "intro" && id != "summary") {
        formal.push_back(formula_for(title));
        examples.push_back("Minimising f(x) = x^2 starting from x_0 = 4.");
    }
    return {{"heading", title}, {"body", join_sentences(body)}, {"formal_expressions", formal}, {"examples", examples}};
}

Json rewrite(const Json& in) {
    const auto action = in.at("action").get<std::string>();
    const auto delta = in.at("delta_words").get<std::int64_t>();
    const auto body = in.at("body").get<std::string>();
    const auto heading = in.at("heading").get<std::string>();
    const std::int64_t target = count_words(body) + delta;
    auto parts = sentences(body);
    if (action == "trim_section") {
        std::vector<std::string> kept;
        std::int64_t words = 0;
        for (const auto& s : parts) {
            const auto w = count_words(s);
            if (!kept.empty() && words + w > target) break;
            kept.push_back(s);
            words += w;
        }
        return {{"body", join_sentences(kept)}};
    }
    std::int64_t words = count_words(body);
    for (std::size_t i = 0; words < target; ++i) {
        const auto s = fill(filler_bank()[i % filler_bank().size()], "{heading}", heading);
        parts.push_back(s);
        words += count_words(s);
    }
    return {{"body", join_sentences(parts)}};
}

Json paginate(const Json& in) {
    const int density_max = in.at("density_max").get<int>();
    Json pages = Json::array();
    for (const auto& sec : in.at("sections")) {
        const int idx = sec.at("index").get<int>();
        std::string title = sec.at("heading").get<std::string>();
        if (title.find_first_not_of(" \t\n") == std::string::npos) title = "Section " + std::to_string(idx + 1);
        std::vector<std::string> bullets;
        for (const auto& s : sentences(sec.at("body").get<std::string>())) {
            if (bullets.size() == 3) break;
            auto b = shorten(s, 10);
            if (b.find_first_not_of(" \t\n.!?") != std::string::npos) bullets.push_back(std::move(b));
        }
        if (bullets.empty()) bullets.push_back(title);
        Json intents = Json::array();
        for (const auto& f : sec.value("formal_expressions", Json::array())) {
            intents.push_back({{"kind", "formula"}, {"payload", f}});
            break;
        }
        while (bullets.size() > 1 && static_cast<int>(bullets.size() + intents.size()) > density_max) bullets.pop_back();
        if (static_cast<int>(bullets.size() + intents.size()) > density_max) intents = Json::array();
        pages.push_back({{"title", title},
                         {"bullet_points", bullets},
                         {"visual_intents", intents},
                         {"source_span", Json::array({idx, idx + 1})},
                         {"est_density", static_cast<int>(bullets.size() + intents.size())}});
    }
    return {{"pages", pages}};
}

Json bbox(double cx, double cy, double w, double h) { return {{"cx", cx}, {"cy", cy}, {"w", w}, {"h", h}}; }

Json scene(const Json& in) {
    Json elements = Json::array();
    Json events = Json::array();
    auto add = [&](const std::string& id, const std::string& kind, const std::string& content, Json box,
                   Json style, double duration) {
        elements.push_back({{"id", id}, {"kind", kind}, {"content", content}, {"bbox", std::move(box)},
                            {"style", std::move(style)}, {"children", Json::array()}});
        events.push_back({{"anchor_id", "a_" + id}, {"verb", "appear"}, {"target_ids", Json::array({id})},
                          {"duration_s", duration}});
    };
    add("title", "text", in.at("title").get<std::string>(), bbox(0, 3.8, 12, 0.8), {{"role", "title"}}, 1.0);
    int i = 0;
    for (const auto& b : in.at("bullets")) {
        ++i;
        add("b" + std::to_string(i), "text", b.get<std::string>(), bbox(-2.5, 2.6 - 0.9 * (i - 1), 10, 0.7),
            {{"role", "bullet"}}, 0.8);
    }
    int j = 0;
    for (const auto& v : in.at("intents")) {
        const auto kind = v.at("kind").get<std::string>();
        std::string ek = "text", prefix = "t";
        if (kind == "formula") ek = "formula", prefix = "f";
        if (kind == "diagram") ek = "shape", prefix = "d";
        if (kind == "image_placeholder") ek = "image_placeholder", prefix = "img";
        if (kind == "table") prefix = "tbl";
        const std::string id = prefix + std::to_string(j + 1);
        add(id, ek, v.at("payload").get<std::string>(), bbox(4.5, 1.0 - 2.0 * j, 5, 1.6),
            {{"intent", std::to_string(j)}}, 1.5);
        if (ek == "formula")
            events.push_back({{"anchor_id", "h_" + id}, {"verb", "highlight"}, {"target_ids", Json::array({id})},
                              {"duration_s", 0.5}});
        ++j;
    }
    return {{"elements", elements}, {"events", events}};
}

Json narrate(const Json& in) {
    const auto title = in.at("title").get<std::string>();
    const bool continued = !in.at("previous").empty();
    Json units = Json::array();
    int n = 0;
    auto unit = [&](std::string text, std::optional<std::string> anchor) {
        Json u = {{"unit_id", "u" + std::to_string(++n)}, {"text", std::move(text)}};
        if (anchor) u["anchor_ref"] = *anchor;
        units.push_back(std::move(u));
    };
    for (const auto& a : in.at("anchors")) {
        if (a.at("verb").get<std::string>() != "appear") continue;
        const auto id = a.at("anchor_id").get<std::string>();
        const auto kind = a.at("kind").get<std::string>();
        const auto content = a.at("content").get<std::string>();
        if (a.at("role").get<std::string>() == "title") {
            unit(continued ? "Building on what we just saw, we now turn to " + title + "."
                           : "Welcome. In this lecture we look at " + title + ".",
                 id);
        } else if (kind == "formula") {
            unit("Take a close look at this expression, which states the idea in symbols.", id);
        } else {
            unit(content + ". Keep this point in mind, because the rest of the slide depends on it.", id);
        }
    }
    unit("That completes this part of " + title + ".", std::nullopt);
    return {{"units", units}};
}

Json repair(const Json& in) {
    Json elements = in.at("elements");
    for (auto& e : elements) e["style"]["repaired"] = "1";
    return {{"elements", elements}};
}

class TemplateLlm final : public gateway::Transport {
public:
    std::string send(const gateway::ServiceRequest& request) override {
        const Json payload = canonical_parse(request.payload, "llm request");
        const Json& in = payload.at("input");
        Json out;
        const std::string& p = request.purpose;
        if (p == "composer.skeletonize") out = skeletonize(in);
        else if (p == "composer.expand") out = expand(in);
        else if (p == "composer.rewrite") out = rewrite(in);
        else if (p == "paginator.paginate") out = paginate(in);
        else if (p == "codegen.scene") out = scene(in);
        else if (p == "narrator.narrate") out = narrate(in);
        else if (p == "debugger.repair") out = repair(in);
        else throw ServiceError("template llm has no answer for purpose '" + p + "'");
        return gateway::llm_response_payload(canonical_dump(out));
    }
};

}  // namespace

std::shared_ptr<gateway::Transport> make_template_llm() { return std::make_shared<TemplateLlm>(); }

}  // namespace lectern::mock
