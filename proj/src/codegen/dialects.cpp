#include <algorithm>
#include <charconv>
#include <cstdio>
#include <regex>
#include <set>

#include "lectern/codegen/codegen.hpp"
#include "lectern/core/assets.hpp"
#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/validate.hpp"

namespace lectern::codegen {

namespace {

constexpr std::string_view kMarkerOpen = "@@anchor:";
constexpr std::string_view kIrType = "SceneIR";

int line_of(std::string_view text, std::size_t pos) {
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

bool is_id_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
           c == '-';
}

std::string tmpl(const std::string& name) {
    std::string t(asset("dialects/manim-ce/" + name));
    while (!t.empty() && t.back() == '\n') t.pop_back();
    return t;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

}  // namespace

std::string marker(const std::string& anchor_id) { return std::string(kMarkerOpen) + anchor_id + "@@"; }

std::vector<MarkerHit> scan_markers(std::string_view text) {
    std::vector<MarkerHit> out;
    for (auto pos = text.find(kMarkerOpen); pos != std::string_view::npos; pos = text.find(kMarkerOpen, pos + 1)) {
        std::size_t i = pos + kMarkerOpen.size();
        const std::size_t start = i;
        while (i < text.size() && is_id_char(text[i])) ++i;
        if (i == start || text.substr(i, 2) != "@@") {
            const int line = line_of(text, pos);
            throw ParseError("malformed anchor marker", line, static_cast<int>(pos - text.rfind('\n', pos)));
        }
        out.push_back({std::string(text.substr(start, i - start)), line_of(text, pos)});
        pos = i + 1;
    }
    return out;
}

std::string python_literal(std::string_view text) {
    std::string out = "\"";
    for (unsigned char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '@': out += "\\x40"; break;
            default:
                if (c < 0x20 || c == 0x7F) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\x%02x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    return out + "\"";
}

// ---- ir-json ---------------------------------------------------------------

std::string emit_ir_json(const SceneProgram& scene) {
    for (const auto& ev : scene.events)
        if (!is_valid_id(ev.anchor_id)) throw CodegenError("anchor id '" + ev.anchor_id + "' cannot be emitted");
    Json value = scene;
    value.erase("source_text");
    for (auto& ev : value.at("events")) ev["marker"] = marker(ev.at("anchor_id").get<std::string>());
    // '@' only ever appears unescaped inside marker values.
    std::string text = replace_all(canonical_dump(envelope(std::string(kIrType), value)), "@", "\\u0040");
    static const std::regex escaped_marker(R"re("marker": "\\u0040\\u0040anchor:([A-Za-z0-9_.-]*)\\u0040\\u0040")re");
    return std::regex_replace(text, escaped_marker, "\"marker\": \"@@anchor:$1@@\"");
}

SceneProgram parse_ir_json(std::string_view source) {
    const auto hits = scan_markers(source);
    Json doc = canonical_parse(source, kIrType);
    Json value = with_schema_errors(kIrType, [&] { return open_envelope(doc, std::string(kIrType)); });
    auto& events = value.at("events");
    if (hits.size() != events.size())
        throw ParseError("expected " + std::to_string(events.size()) + " anchor markers, found " +
                             std::to_string(hits.size()),
                         hits.empty() ? 1 : hits.back().line, 1);
    for (std::size_t i = 0; i < events.size(); ++i) {
        auto& ev = events[i];
        const std::string want = with_schema_errors(kIrType, [&] { return ev.at("anchor_id").get<std::string>(); });
        if (!ev.contains("marker") || ev["marker"] != marker(want) || hits[i].anchor_id != want)
            throw ParseError("anchor marker does not match event '" + want + "'", hits[i].line, 1);
        ev.erase("marker");
    }
    value["source_text"] = std::string(source);
    return with_schema_errors(kIrType, [&] { return value.get<SceneProgram>(); });
}

// ---- manim-ce --------------------------------------------------------------

std::string emit_manim(const SceneProgram& scene) {
    const std::string indent = "        ";
    std::string out = fill_template(tmpl("header"), {{"page", std::to_string(scene.page_index)},
                                                     {"stage", to_name(scene.stage)}});
    out += '\n';
    const std::size_t body_start = out.size();

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < scene.elements.size(); ++i) index.emplace(scene.elements[i].id, i);
    auto var = [&](const std::string& id) {
        auto it = index.find(id);
        if (it == index.end()) throw CodegenError("event targets unknown element '" + id + "'");
        return "m_" + std::to_string(it->second);
    };
    std::set<std::string> built;
    std::function<void(const std::string&, std::string&)> build = [&](const std::string& id, std::string& dst) {
        if (built.count(id)) return;
        built.insert(id);
        const SceneElement& e = scene.elements[index.at(id)];
        std::string line;
        if (e.kind == ElementKind::group) {
            std::string kids;
            for (const auto& c : e.children) {
                if (!index.count(c)) throw CodegenError("group '" + e.id + "' names unknown child '" + c + "'");
                build(c, dst);
                kids += (kids.empty() ? "" : ", ") + var(c);
            }
            line = fill_template(tmpl("element_group"), {{"var", var(id)}, {"children", kids}});
        } else {
            const std::string kind = to_name(e.kind);
            line = fill_template(tmpl("element_" + kind), {{"var", var(id)},
                                                           {"content", python_literal(e.content)},
                                                           {"cx", format_real(e.bbox.cx)},
                                                           {"cy", format_real(e.bbox.cy)},
                                                           {"w", format_real(e.bbox.w)},
                                                           {"h", format_real(e.bbox.h)}});
        }
        dst += indent + line + "\n";
    };

    std::set<std::string> referenced;
    std::function<void(const std::string&)> reach = [&](const std::string& id) {
        if (!referenced.insert(id).second) return;
        auto it = index.find(id);
        if (it != index.end())
            for (const auto& c : scene.elements[it->second].children) reach(c);
    };
    for (const auto& ev : scene.events)
        for (const auto& t : ev.target_ids) reach(t);
    for (const auto& e : scene.elements)
        if (!referenced.count(e.id)) build(e.id, out);

    for (const auto& ev : scene.events) {
        if (!is_valid_id(ev.anchor_id)) throw CodegenError("anchor id '" + ev.anchor_id + "' cannot be emitted");
        std::string targets;
        for (const auto& t : ev.target_ids) targets += (targets.empty() ? "" : ",") + t;
        out += indent + "# " + marker(ev.anchor_id) + " verb=" + to_name(ev.verb) +
               " t=" + (ev.start_s ? format_real(*ev.start_s) : std::string("-")) +
               " d=" + format_real(ev.duration_s) + " targets=" + targets + "\n";
        for (const auto& t : ev.target_ids) {
            var(t);
            build(t, out);
        }
        std::string expr;
        if (ev.target_ids.size() == 1) {
            expr = var(ev.target_ids.front());
        } else if (!ev.target_ids.empty()) {
            for (const auto& t : ev.target_ids) expr += (expr.empty() ? "" : ", ") + var(t);
            expr = "VGroup(" + expr + ")";
        }
        const bool instant = to_micro(ev.duration_s) <= 0;
        std::string stmt;
        if (ev.verb == EventVerb::wait || ev.target_ids.empty()) {
            stmt = instant ? "pass" : fill_template(tmpl("verb_wait"), {{"d", format_real(ev.duration_s)}});
        } else if (instant) {
            if (ev.verb == EventVerb::appear) stmt = fill_template(tmpl("instant_appear"), {{"targets", expr}});
            else if (ev.verb == EventVerb::disappear) stmt = fill_template(tmpl("instant_disappear"), {{"targets", expr}});
            else stmt = "pass";
        } else {
            stmt = fill_template(tmpl("verb_" + to_name(ev.verb)),
                                 {{"targets", expr}, {"d", format_real(ev.duration_s)}});
        }
        out += indent + stmt + "\n";
    }
    if (out.size() == body_start) out += indent + "pass\n";
    return out;
}

SceneProgram parse_manim(std::string_view source) {
    static const std::regex header(R"(^# lectern scene page=(-?[0-9]+) stage=([a-z_]+)$)");
    static const std::regex event(
        R"(^\s*# @@anchor:([A-Za-z0-9_.-]+)@@ verb=([a-z]+) t=(-|[0-9]+\.[0-9]+) d=([0-9]+\.[0-9]+) targets=([A-Za-z0-9_.,-]*)$)");
    SceneProgram scene;
    bool saw_header = false;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos < source.size()) {
        auto nl = source.find('\n', pos);
        if (nl == std::string_view::npos) nl = source.size();
        const std::string line(source.substr(pos, nl - pos));
        pos = nl + 1;
        ++lineno;
        std::smatch m;
        if (!saw_header && std::regex_match(line, m, header)) {
            saw_header = true;
            scene.page_index = std::stoi(m[1].str());
            try {
                scene.stage = from_name<SceneStage>(m[2].str());
            } catch (const SchemaError&) {
                throw ParseError("unknown scene stage '" + m[2].str() + "'", lineno, 1);
            }
            continue;
        }
        if (line.find(kMarkerOpen) == std::string::npos) continue;
        if (!std::regex_match(line, m, event)) throw ParseError("malformed anchor marker", lineno, 1);
        AnimationEvent ev;
        ev.anchor_id = m[1].str();
        try {
            ev.verb = from_name<EventVerb>(m[2].str());
        } catch (const SchemaError&) {
            throw ParseError("unknown verb '" + m[2].str() + "'", lineno, 1);
        }
        if (m[3].str() != "-") ev.start_s = quantize(std::stod(m[3].str()));
        ev.duration_s = quantize(std::stod(m[4].str()));
        const std::string targets = m[5].str();
        for (std::size_t a = 0; a < targets.size();) {
            auto b = targets.find(',', a);
            if (b == std::string::npos) b = targets.size();
            if (b == a) throw ParseError("empty target id", lineno, 1);
            ev.target_ids.push_back(targets.substr(a, b - a));
            a = b + 1;
        }
        scene.events.push_back(std::move(ev));
    }
    if (!saw_header) throw ParseError("missing scene header", 1, 1);
    scene.source_text = std::string(source);
    return scene;
}

// ---- registry --------------------------------------------------------------

DialectRegistry& DialectRegistry::global() {
    static DialectRegistry* registry = [] {
        auto* r = new DialectRegistry;
        r->add({"ir-json", emit_ir_json, parse_ir_json, true});
        r->add({"manim-ce", emit_manim, parse_manim, false});
        return r;
    }();
    return *registry;
}

void DialectRegistry::add(DialectSpec spec) {
    std::lock_guard lock(mutex_);
    if (!is_valid_id(spec.name)) throw DialectError("invalid dialect name '" + spec.name + "'");
    const std::string name = spec.name;
    if (!dialects_.emplace(name, std::move(spec)).second)
        throw DialectError("dialect '" + name + "' is already registered");
}

const DialectSpec& DialectRegistry::get(const std::string& name) const {
    std::lock_guard lock(mutex_);
    auto it = dialects_.find(name);
    if (it == dialects_.end()) throw DialectError("unknown dialect '" + name + "'");
    return it->second;
}

std::vector<std::string> DialectRegistry::names() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [k, v] : dialects_) out.push_back(k);
    return out;
}

const DialectSpec& dialect(const std::string& name) { return DialectRegistry::global().get(name); }

std::string emit(const SceneProgram& scene, const DialectSpec& d) {
    if (!d.emit) throw DialectError("dialect '" + d.name + "' cannot emit");
    return d.emit(scene);
}

SceneProgram parse_emitted(std::string_view source, const DialectSpec& d) {
    if (!d.parse) throw DialectError("dialect '" + d.name + "' cannot parse");
    return d.parse(source);
}

}  // namespace lectern::codegen
