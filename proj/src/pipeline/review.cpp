#include "lectern/pipeline/review.hpp"

#include <httplib.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "lectern/codegen/codegen.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/layout/layout.hpp"

namespace lectern::pipeline {

namespace fs = std::filesystem;

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string px(double v) { return format_real(v * kPreviewPxPerUnit); }

ReviewError not_found(const std::string& what) { return ReviewError(what + " not found", "not_found"); }
ReviewError not_ready(const std::string& what) { return ReviewError(what, "not_ready"); }

void check_revision(const PageState& p, std::optional<int> if_match) {
    if (if_match && *if_match != p.revision)
        throw ReviewError("page changed since revision " + std::to_string(*if_match) + "; current is " +
                              std::to_string(p.revision),
                          "stale_revision");
}

}  // namespace

std::string preview_svg(const SceneProgram& scene, const FrameSpec& frame, const ConflictReport& conflicts) {
    std::set<std::string> conflicted;
    for (const auto& o : conflicts.overlaps) conflicted.insert({o.a, o.b});
    for (const auto& o : conflicts.overflows) conflicted.insert(o.element_id);

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(frame.width_u) << "\" height=\""
        << px(frame.height_u) << "\" viewBox=\"0 0 " << px(frame.width_u) << " " << px(frame.height_u)
        << "\" data-page=\"" << scene.page_index << "\" data-stage=\"" << to_name(scene.stage) << "\">\n";
    out << "  <rect class=\"frame\" x=\"0.000000\" y=\"0.000000\" width=\"" << px(frame.width_u) << "\" height=\""
        << px(frame.height_u) << "\" fill=\"white\" stroke=\"black\"/>\n";
    for (const auto& e : scene.elements) {
        const double x = e.bbox.left() + frame.width_u / 2;
        const double y = frame.height_u / 2 - e.bbox.top();
        std::string cls = "element " + to_name(e.kind);
        if (conflicted.count(e.id)) cls += " conflict";
        const char* fill = e.kind == ElementKind::image_placeholder ? "#cccccc"
                           : e.kind == ElementKind::group           ? "none"
                                                                    : "#f4f4f4";
        out << "  <g id=\"el-" << xml_escape(e.id) << "\" class=\"" << cls << "\">\n";
        out << "    <rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(e.bbox.w) << "\" height=\""
            << px(e.bbox.h) << "\" fill=\"" << fill << "\" stroke=\"" << (conflicted.count(e.id) ? "red" : "gray")
            << "\"" << (e.kind == ElementKind::group ? " stroke-dasharray=\"4 2\"" : "") << "/>\n";
        if (e.kind != ElementKind::group)
            out << "    <text x=\"" << px(x + e.bbox.w / 2) << "\" y=\"" << px(y + e.bbox.h / 2)
                << "\" text-anchor=\"middle\" dominant-baseline=\"middle\">" << xml_escape(e.content) << "</text>\n";
        out << "  </g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

ReviewDesk::ReviewDesk(fs::path project_root, Continue on_continue)
    : root_(std::move(project_root)), on_continue_(std::move(on_continue)) {}

ProjectStore ReviewDesk::store(const std::string& run_id) const {
    if (run_id.empty() || run_id.find('/') != std::string::npos || run_id.front() == '.') throw not_found("run");
    ProjectStore s(root_, run_id);
    if (!s.has_state()) throw not_found("run '" + run_id + "'");
    return s;
}

Json ReviewDesk::runs() const {
    std::lock_guard guard(mutex_);
    std::vector<std::string> ids;
    if (fs::exists(root_))
        for (const auto& entry : fs::directory_iterator(root_))
            if (entry.is_directory() && fs::exists(entry.path() / "state")) ids.push_back(entry.path().filename());
    std::sort(ids.begin(), ids.end());
    Json list = Json::array();
    for (const auto& id : ids) {
        const auto state = ProjectStore(root_, id).load_state();
        list.push_back({{"run_id", id}, {"stage", state.stage ? Json(to_name(*state.stage)) : Json(nullptr)}});
    }
    return envelope("RunList", {{"runs", list}});
}

Json ReviewDesk::pages(const std::string& run_id) const {
    std::lock_guard guard(mutex_);
    auto s = store(run_id);
    RunLock lock(s.dir());
    const auto state = s.load_state();
    const auto config = s.get<PipelineConfig>("config");
    Json list = Json::array();
    for (const auto& [i, p] : state.pages) {
        const auto bp = s.get<PageBlueprint>(page_file(i, "blueprint"));
        list.push_back({{"page_index", i},
                        {"title", bp.title},
                        {"stage", to_name(p.stage)},
                        {"revision", p.revision},
                        {"approved", p.approved}});
    }
    return envelope("PageList", {{"run_id", run_id},
                                 {"stage", state.stage ? Json(to_name(*state.stage)) : Json(nullptr)},
                                 {"review_enabled", state.review_enabled},
                                 {"frame", Json(config.frame)},
                                 {"cell_u", quantize(config.cell_u)},
                                 {"margin_u", quantize(config.margin_u)},
                                 {"pages", list}});
}

std::string ReviewDesk::preview(const std::string& run_id, int page) const {
    std::lock_guard guard(mutex_);
    auto s = store(run_id);
    RunLock lock(s.dir());
    const auto state = s.load_state();
    if (!state.pages.count(page) || state.pages.at(page).stage < PageStage::generated)
        throw not_found("page " + std::to_string(page));
    const auto config = s.get<PipelineConfig>("config");
    const auto scene = s.get<SceneProgram>(page_file(page, "scene"));
    return preview_svg(scene, config.frame, layout::detect_conflicts(scene, config.frame, config.margin_u));
}

ConflictReport ReviewDesk::conflicts(const std::string& run_id, int page) const {
    std::lock_guard guard(mutex_);
    auto s = store(run_id);
    RunLock lock(s.dir());
    const auto state = s.load_state();
    if (!state.pages.count(page) || state.pages.at(page).stage < PageStage::generated)
        throw not_found("page " + std::to_string(page));
    const auto config = s.get<PipelineConfig>("config");
    return layout::detect_conflicts(s.get<SceneProgram>(page_file(page, "scene")), config.frame, config.margin_u);
}

int ReviewDesk::revision(const std::string& run_id, int page) const {
    std::lock_guard guard(mutex_);
    auto s = store(run_id);
    const auto state = s.load_state();
    if (!state.pages.count(page)) throw not_found("page " + std::to_string(page));
    return state.pages.at(page).revision;
}

bool ReviewDesk::enable_review(const std::string& run_id) {
    std::lock_guard guard(mutex_);
    auto s = store(run_id);
    RunLock lock(s.dir());
    auto state = s.load_state();
    if (state.review_enabled) return true;
    if (state.stage && *state.stage >= GlobalStage::rendered) return false;
    state.review_enabled = true;
    state.log("run.review_enabled");
    s.save_state(state);
    return true;
}

Json ReviewDesk::apply(ProjectStore& s, RunState& state, int page, const EditSet& edits, const std::string& note) {
    const auto config = s.get<PipelineConfig>("config");
    const auto scene = s.get<SceneProgram>(page_file(page, "scene"));
    const auto result =
        layout::apply_human_edits(scene, edits, config.frame, config.margin_u, codegen::dialect(config.dialect));
    std::vector<EditSet> history;
    if (s.exists(page_file(page, "edits"))) history = s.get<std::vector<EditSet>>(page_file(page, "edits"));
    history.push_back(edits);
    s.put(page_file(page, "edits"), history);
    s.put(page_file(page, "scene"), result.scene);
    s.put(page_file(page, "conflicts"), result.report);
    auto& p = state.pages.at(page);
    ++p.revision;
    state.advance(page, PageStage::final_);
    state.log("page.human", page, note);
    return Json(result.report);
}

Json ReviewDesk::post_edits(const std::string& run_id, int page, const EditSet& edits, std::optional<int> if_match) {
    std::lock_guard guard(mutex_);
    auto s = store(run_id);
    RunLock lock(s.dir());
    auto state = s.load_state();
    if (!state.pages.count(page)) throw not_found("page " + std::to_string(page));
    auto& p = state.pages.at(page);
    check_revision(p, if_match);
    if (p.stage < PageStage::laid_out) throw not_ready("page " + std::to_string(page) + " is still being generated");
    if (p.stage >= PageStage::rendered || (state.stage && *state.stage >= GlobalStage::rendered))
        throw not_ready("page " + std::to_string(page) + " is already rendered");
    const Json report = apply(s, state, page, edits, "edits=" + std::to_string(edits.edits.size()));
    state.pages.at(page).approved = false;
    s.save_state(state);
    const auto& now = state.pages.at(page);
    return envelope("EditResult", {{"page_index", page},
                                   {"revision", now.revision},
                                   {"stage", to_name(now.stage)},
                                   {"approved", now.approved},
                                   {"conflicts", report}});
}

Json ReviewDesk::approve(const std::string& run_id, int page, std::optional<int> if_match) {
    std::lock_guard guard(mutex_);
    auto s = store(run_id);
    RunLock lock(s.dir());
    auto state = s.load_state();
    if (!state.pages.count(page)) throw not_found("page " + std::to_string(page));
    check_revision(state.pages.at(page), if_match);
    if (state.pages.at(page).stage < PageStage::laid_out)
        throw not_ready("page " + std::to_string(page) + " is still being generated");
    if (state.pages.at(page).stage < PageStage::final_) apply(s, state, page, EditSet{page, {}, "", ""}, "approve");
    auto& p = state.pages.at(page);
    if (!p.approved) {
        p.approved = true;
        state.log("page.approve", page);
    }
    s.save_state(state);
    return envelope("PageStatus",
                    {{"page_index", page}, {"revision", p.revision}, {"stage", to_name(p.stage)}, {"approved", true}});
}

Json ReviewDesk::continue_run(const std::string& run_id) {
    std::unique_lock guard(mutex_);
    {
        auto s = store(run_id);
        RunLock lock(s.dir());
        auto state = s.load_state();
        std::vector<int> waiting;
        for (const auto& [i, p] : state.pages)
            if (!p.approved && p.stage < PageStage::rendered) waiting.push_back(i);
        if (!state.stage || *state.stage < GlobalStage::validated || !waiting.empty()) {
            std::string msg = "every page must be approved first";
            if (!waiting.empty()) {
                msg += "; waiting on";
                for (int i : waiting) msg += " " + std::to_string(i);
            }
            throw not_ready(msg);
        }
        if (!state.continue_requested) {
            state.continue_requested = true;
            state.log("run.continue");
            s.save_state(state);
        }
    }
    const RunResult r = on_continue_(run_id);
    const auto state = store(run_id).load_state();
    return envelope("ContinueResult",
                    {{"run_id", run_id},
                     {"status", r.status == RunStatus::completed ? "completed" : "awaiting_review"},
                     {"stage", state.stage ? Json(to_name(*state.stage)) : Json(nullptr)}});
}

namespace {

int status_for(const Error& e) {
    if (e.kind() == "ReviewError") return e.detail() == "not_found" ? 404 : 409;
    if (e.kind() == "LockError") return 409;
    if (e.kind() == "SchemaError" || e.kind() == "ParseError" || e.kind() == "EditError") return 400;
    return 500;
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    res.status = status;
    res.set_content(canonical_dump({{"code", code}, {"message", message}}), "application/json");
}

std::optional<int> if_match(const httplib::Request& req) {
    if (!req.has_header("If-Match")) return std::nullopt;
    std::string v = req.get_header_value("If-Match");
    v.erase(std::remove(v.begin(), v.end(), '"'), v.end());
    try {
        std::size_t used = 0;
        const int r = std::stoi(v, &used);
        if (used == v.size()) return r;
    } catch (const std::exception&) {
    }
    throw SchemaError("If-Match must be a page revision number");
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const ReviewError& e) {
            send_error(res, status_for(e), e.detail(), e.what());
        } catch (const Error& e) {
            send_error(res, status_for(e), e.kind(), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "InternalError", e.what());
        }
    };
}

void send_json(httplib::Response& res, const Json& value) {
    res.set_content(canonical_dump(value), "application/json");
}

int page_param(const httplib::Request& req) { return std::stoi(req.matches[2]); }

}  // namespace

void mount_review_api(httplib::Server& server, ReviewDesk& desk) {
    server.Get("/runs", guarded([&desk](const httplib::Request&, httplib::Response& res) { send_json(res, desk.runs()); }));
    server.Get(R"(/runs/([A-Za-z0-9_-]+)/pages)", guarded([&desk](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, desk.pages(req.matches[1]));
               }));
    server.Get(R"(/runs/([A-Za-z0-9_-]+)/pages/(\d{1,6})/preview)",
               guarded([&desk](const httplib::Request& req, httplib::Response& res) {
                   const std::string run = req.matches[1];
                   const int page = page_param(req);
                   res.set_content(desk.preview(run, page), "image/svg+xml");
                   res.set_header("ETag", "\"" + std::to_string(desk.revision(run, page)) + "\"");
               }));
    server.Get(R"(/runs/([A-Za-z0-9_-]+)/pages/(\d{1,6})/conflicts)",
               guarded([&desk](const httplib::Request& req, httplib::Response& res) {
                   res.set_content(serialize(desk.conflicts(req.matches[1], page_param(req))), "application/json");
               }));
    server.Post(R"(/runs/([A-Za-z0-9_-]+)/pages/(\d{1,6})/edits)",
                guarded([&desk](const httplib::Request& req, httplib::Response& res) {
                    const auto edits = deserialize<EditSet>(req.body);
                    send_json(res, desk.post_edits(req.matches[1], page_param(req), edits, if_match(req)));
                }));
    server.Post(R"(/runs/([A-Za-z0-9_-]+)/pages/(\d{1,6})/approve)",
                guarded([&desk](const httplib::Request& req, httplib::Response& res) {
                    send_json(res, desk.approve(req.matches[1], page_param(req), if_match(req)));
                }));
    server.Post(R"(/runs/([A-Za-z0-9_-]+)/continue)", guarded([&desk](const httplib::Request& req, httplib::Response& res) {
                    send_json(res, desk.continue_run(req.matches[1]));
                }));
}

void serve_review(ReviewDesk& desk, const std::string& host, int port) {
    httplib::Server server;
    mount_review_api(server, desk);
    if (!server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace lectern::pipeline
