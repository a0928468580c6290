#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "lectern/core/errors.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/pipeline/review.hpp"
#include "pipeline_support.hpp"

using namespace lectern;
using namespace lectern::pipeline;
using testing::Rig;

namespace {

struct ReviewRig {
    ReviewRig()
        : dir("review"),
          rig(dir.path()),
          run_id(rig.pipeline.run(testing::sample_outline(), testing::sample_config(true)).run_id),
          desk(dir.path(), [this](const std::string& id) { return rig.pipeline.resume(id); }) {}
    testing::TempDir dir;
    Rig rig;
    std::string run_id;
    ReviewDesk desk;

    ProjectStore store() const { return ProjectStore(dir.path(), run_id); }
};

std::string code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ReviewError& e) {
        return e.detail();
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

SceneProgram two_boxes() {
    SceneProgram s;
    s.page_index = 1;
    s.stage = SceneStage::laid_out;
    s.elements = {{"title", ElementKind::text, "T <1>", {0, 4, 2, 1}, {}, {}},
                  {"a", ElementKind::shape, "A", {-1, 0, 2, 2}, {}, {}},
                  {"b", ElementKind::image_placeholder, "B", {0, 0, 2, 2}, {}, {}}};
    return s;
}

}  // namespace

TEST_SUITE("review") {
    TEST_CASE("preview maps units to pixels with y down and marks conflicts") {
        const auto s = two_boxes();
        ConflictReport r;
        r.overlaps = {{"a", "b", 2.0}};
        const auto svg = preview_svg(s, FrameSpec{}, r);
        CHECK(svg.find("width=\"1600.000000\" height=\"900.000000\"") != std::string::npos);
        CHECK(svg.find("<g id=\"el-title\" class=\"element text\">") != std::string::npos);
        CHECK(svg.find("<rect x=\"700.000000\" y=\"0.000000\" width=\"200.000000\" height=\"100.000000\"") !=
              std::string::npos);
        CHECK(svg.find("class=\"element shape conflict\"") != std::string::npos);
        CHECK(svg.find("class=\"element image_placeholder conflict\"") != std::string::npos);
        CHECK(svg.find("T &lt;1&gt;") != std::string::npos);
        CHECK(preview_svg(s, FrameSpec{}, r) == svg);
    }

    TEST_CASE("desk lists, edits, approves and continues") {
        ReviewRig t;
        const auto runs = open_envelope(t.desk.runs(), "RunList").at("runs");
        REQUIRE(runs.size() == 1);
        CHECK(runs[0].at("stage") == "awaiting_review");
        const auto listing = open_envelope(t.desk.pages(t.run_id), "PageList");
        CHECK(listing.at("cell_u").get<double>() == 0.25);
        const auto pages = listing.at("pages");
        REQUIRE(pages.size() >= 3);
        CHECK(pages[0].at("revision") == 0);

        CHECK(code_of([&] { t.desk.continue_run(t.run_id); }) == "not_ready");

        auto scene = t.store().get<SceneProgram>(page_file(1, "scene"));
        std::string target;
        for (const auto& e : scene.elements)
            if (e.kind != ElementKind::group && e.id.rfind("title", 0) != 0) target = e.id;
        REQUIRE_FALSE(target.empty());
        const auto before = t.desk.conflicts(t.run_id, 1);
        CHECK(before.empty());
        EditSet move{1, {{target, BBox{7.5, 4.0, 2.0, 2.0}, std::nullopt, false}}, "educator", "t0"};
        const auto res = open_envelope(t.desk.post_edits(t.run_id, 1, move, 0), "EditResult");
        CHECK(res.at("revision") == 1);
        CHECK(res.at("stage") == "final");
        const auto after = t.desk.conflicts(t.run_id, 1);
        REQUIRE(after.overflows.size() == 1);
        CHECK(after.overflows[0].element_id == target);
        CHECK(t.desk.preview(t.run_id, 1).find("id=\"el-" + target + "\" class=\"element") != std::string::npos);

        CHECK(code_of([&] { t.desk.post_edits(t.run_id, 1, move, 0); }) == "stale_revision");
        CHECK(code_of([&] { t.desk.approve(t.run_id, 1, 0); }) == "stale_revision");
        EditSet wrong_page = move;
        wrong_page.page_index = 2;
        CHECK(code_of([&] { t.desk.post_edits(t.run_id, 1, wrong_page, std::nullopt); }) == "EditError");
        CHECK(code_of([&] { t.desk.post_edits(t.run_id, 99, move, std::nullopt); }) == "not_found");
        CHECK(code_of([&] { t.desk.pages("run-nope"); }) == "not_found");

        for (const auto& p : pages) t.desk.approve(t.run_id, p.at("page_index").get<int>(), std::nullopt);
        const auto done = open_envelope(t.desk.continue_run(t.run_id), "ContinueResult");
        CHECK(done.at("status") == "completed");
        CHECK(done.at("stage") == "merged");

        const auto state = t.store().load_state();
        for (const auto& [i, p] : state.pages) {
            CHECK(p.approved);
            CHECK(p.stage == PageStage::rendered);
            const auto edits = t.store().get<std::vector<EditSet>>(page_file(i, "edits"));
            CHECK(edits.size() == 1);
            if (i == 1) CHECK(edits[0] == move);
            else CHECK(edits[0].edits.empty());
        }
        const auto final1 = t.store().get<SceneProgram>(page_file(1, "scene"));
        for (const auto& e : final1.elements)
            if (e.id == target) CHECK(e.bbox == BBox{7.5, 4.0, 2.0, 2.0});
        CHECK(code_of([&] { t.desk.post_edits(t.run_id, 1, move, std::nullopt); }) == "not_ready");
    }

    TEST_CASE("starting review turns the gate on until the run renders") {
        testing::TempDir dir("review-gate");
        Rig rig(dir.path());
        RunOptions halt;
        halt.after_page = [](int page) {
            if (page == 1) throw std::runtime_error("halt");
        };
        Rig crashing(dir.path(), halt);
        CHECK_THROWS(crashing.pipeline.run(testing::sample_outline(), testing::sample_config()));
        const auto id = make_run_id(testing::sample_outline(), testing::sample_config());
        ReviewDesk desk(dir.path(), [&](const std::string& run) { return rig.pipeline.resume(run); });
        CHECK(desk.enable_review(id));
        CHECK(rig.pipeline.resume(id).status == RunStatus::awaiting_review);
        const auto state = ProjectStore(dir.path(), id).load_state();
        CHECK(state.review_enabled);
        CHECK(state.count("run.review_enabled") == 1);

        testing::TempDir done("review-done");
        const auto finished = Rig(done.path()).pipeline.run(testing::sample_outline(), testing::sample_config()).run_id;
        ReviewDesk late(done.path(), [](const std::string&) -> RunResult { throw std::logic_error("unused"); });
        CHECK_FALSE(late.enable_review(finished));
    }

    TEST_CASE("http api speaks canonical bodies and {code, message} errors") {
        ReviewRig t;
        httplib::Server server;
        mount_review_api(server, t.desk);
        const int port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        std::thread th([&] { server.listen_after_bind(); });
        server.wait_until_ready();
        httplib::Client cli("127.0.0.1", port);

        auto r = cli.Get("/runs");
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(open_envelope(canonical_parse(r->body), "RunList").at("runs")[0].at("run_id") == t.run_id);

        r = cli.Get("/runs/" + t.run_id + "/pages/1/preview");
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(r->get_header_value("Content-Type") == "image/svg+xml");
        CHECK(r->get_header_value("ETag") == "\"0\"");
        CHECK(r->body.rfind("<svg", 0) == 0);

        r = cli.Get("/runs/" + t.run_id + "/pages/1/conflicts");
        REQUIRE(r);
        CHECK(deserialize<ConflictReport>(r->body).page_index == 1);

        r = cli.Get("/runs/run-missing/pages");
        REQUIRE(r);
        CHECK(r->status == 404);
        CHECK(canonical_parse(r->body).at("code") == "not_found");

        r = cli.Post("/runs/" + t.run_id + "/pages/1/edits", "{not json", "application/json");
        REQUIRE(r);
        CHECK(r->status == 400);
        CHECK(canonical_parse(r->body).at("code") == "ParseError");

        const EditSet empty{1, {}, "educator", ""};
        r = cli.Post("/runs/" + t.run_id + "/pages/1/edits", {{"If-Match", "\"0\""}}, serialize(empty),
                     "application/json");
        REQUIRE(r);
        CHECK(r->status == 200);
        r = cli.Post("/runs/" + t.run_id + "/pages/1/edits", {{"If-Match", "\"0\""}}, serialize(empty),
                     "application/json");
        REQUIRE(r);
        CHECK(r->status == 409);
        CHECK(canonical_parse(r->body).at("code") == "stale_revision");

        r = cli.Post("/runs/" + t.run_id + "/continue", "", "application/json");
        REQUIRE(r);
        CHECK(r->status == 409);
        const auto pages = open_envelope(t.desk.pages(t.run_id), "PageList").at("pages");
        for (const auto& p : pages) {
            r = cli.Post("/runs/" + t.run_id + "/pages/" + std::to_string(p.at("page_index").get<int>()) + "/approve",
                         "", "application/json");
            REQUIRE(r);
            CHECK(r->status == 200);
        }
        r = cli.Post("/runs/" + t.run_id + "/continue", "", "application/json");
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(open_envelope(canonical_parse(r->body), "ContinueResult").at("stage") == "merged");

        server.stop();
        th.join();
    }
}
