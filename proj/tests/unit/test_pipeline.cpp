#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include "lectern/core/errors.hpp"
#include "lectern/core/fs.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/pipeline/pipeline.hpp"
#include "pipeline_support.hpp"

using namespace lectern;
using namespace lectern::pipeline;
using testing::Rig;
using testing::sample_config;
using testing::sample_outline;

namespace {

const std::vector<std::string> kPageSteps = {"page.codegen", "page.narrate", "page.tts",   "page.sync",
                                             "page.debug",   "page.layout",  "page.human", "page.render"};

struct Halt : std::runtime_error {
    Halt() : std::runtime_error("halt") {}
};

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("batch run completes and every page step runs once") {
        testing::TempDir dir("pipe");
        Rig rig(dir.path());
        const auto r = rig.pipeline.run(sample_outline(), sample_config());
        REQUIRE(r.status == RunStatus::completed);
        REQUIRE(r.output);
        ProjectStore store(dir.path(), r.run_id);
        const auto state = store.load_state();
        CHECK(state.stage == GlobalStage::merged);
        REQUIRE(state.pages.size() >= 3);
        CHECK(state.count("run.await_review") == 0);
        for (const auto& [i, p] : state.pages) {
            CHECK(p.stage == PageStage::rendered);
            for (const auto& step : kPageSteps) CHECK_MESSAGE(state.count(step, i) == 1, step << " page " << i);
        }
        CHECK(r.output->lecture_scripts.size() == state.pages.size());
        CHECK(*r.output->video_plan.merged_ref == "merged.manifest");
        CHECK(std::filesystem::exists(store.dir() / "merged.manifest"));
        CHECK_FALSE(std::filesystem::exists(store.dir() / "lock"));
        double audio = 0;
        for (const auto& [i, p] : state.pages)
            audio += store.get<SynthesisResult>(page_file(i, "audio-meta")).audio.duration_s;
        CHECK(std::abs(r.output->video_plan.total_duration_s() - audio) <= 1e-6);
        CHECK(store.get<PipelineOutput>("output") == *r.output);
        for (const auto& [i, p] : state.pages) {
            const auto scene = store.get<SceneProgram>(page_file(i, "scene"));
            CHECK(scene.stage == SceneStage::final_);
        }
    }

    TEST_CASE("two runs produce byte-identical project trees") {
        testing::TempDir a("pipe-a"), b("pipe-b");
        Rig ra(a.path()), rb(b.path());
        const auto x = ra.pipeline.run(sample_outline(), sample_config());
        const auto y = rb.pipeline.run(sample_outline(), sample_config());
        CHECK(x.run_id == y.run_id);
        const auto sa = testing::snapshot(a.path());
        CHECK(sa == testing::snapshot(b.path()));
        for (const auto& [path, bytes] : sa) CHECK_MESSAGE(bytes.find(a.path().string()) == std::string::npos, path);
    }

    TEST_CASE("run id depends on outline and config only") {
        auto o = sample_outline();
        auto c = sample_config();
        const auto id = make_run_id(o, c);
        CHECK(id.rfind("run-", 0) == 0);
        CHECK(id.size() == 16);
        CHECK(make_run_id(o, c) == id);
        c.seed = 9;
        CHECK(make_run_id(o, c) != id);
        o.language = "de";
        CHECK(make_run_id(o, sample_config()) != id);
    }

    TEST_CASE("crash after page 2 resumes without recomputing") {
        testing::TempDir crashed("pipe-crash"), clean("pipe-clean");
        std::string run_id;
        {
            RunOptions opts;
            opts.after_page = [](int page) {
                if (page == 2) throw Halt();
            };
            Rig rig(crashed.path(), opts);
            CHECK_THROWS_AS(rig.pipeline.run(sample_outline(), sample_config()), Halt);
            run_id = make_run_id(sample_outline(), sample_config());
            const auto state = ProjectStore(crashed.path(), run_id).load_state();
            CHECK(state.pages.at(1).stage == PageStage::laid_out);
            CHECK(state.pages.at(2).stage == PageStage::laid_out);
            CHECK(state.pages.at(3).stage == PageStage::narrated);
        }
        Rig resumed(crashed.path());
        const auto r = resumed.pipeline.resume(run_id);
        CHECK(r.status == RunStatus::completed);
        const auto state = ProjectStore(crashed.path(), run_id).load_state();
        for (const auto& step : {"composer.skeletonize", "composer.expand", "composer.refine", "paginator.paginate"})
            CHECK(state.count(step) == 1);
        for (const auto& [i, p] : state.pages)
            for (const auto& step : kPageSteps) CHECK_MESSAGE(state.count(step, i) == 1, step << " page " << i);
        CHECK(resumed.tts.calls == static_cast<int>(state.pages.size()) - 2);

        Rig reference(clean.path());
        reference.pipeline.run(sample_outline(), sample_config());
        CHECK(testing::snapshot(crashed.path()) == testing::snapshot(clean.path()));
    }

    TEST_CASE("resuming a finished run calls no service") {
        testing::TempDir dir("pipe-done");
        const auto id = Rig(dir.path()).pipeline.run(sample_outline(), sample_config()).run_id;
        const auto before = testing::snapshot(dir.path());
        Rig again(dir.path());
        const auto r = again.pipeline.resume(id);
        CHECK(r.status == RunStatus::completed);
        CHECK(r.output);
        CHECK(again.svc.gateway.stats().network_calls == 0);
        CHECK(again.tts.calls == 0);
        CHECK(again.renderer.calls() == 0);
        CHECK(again.pipeline.run(sample_outline(), sample_config()).output == r.output);
        CHECK(testing::snapshot(dir.path()) == before);
    }

    TEST_CASE("corrupt artifacts stop a resume and name the file") {
        testing::TempDir dir("pipe-corrupt");
        const auto id = Rig(dir.path()).pipeline.run(sample_outline(), sample_config()).run_id;
        ProjectStore store(dir.path(), id);
        const auto scene = store.dir() / "pages" / "1" / "scene";
        std::ofstream(scene, std::ios::trunc) << "{\"type\": \"SceneIR\", \"value\": {";
        try {
            Rig(dir.path()).pipeline.resume(id);
            FAIL("expected ResumeError");
        } catch (const ResumeError& e) {
            CHECK(e.detail() == scene.string());
        }
        std::ofstream(store.state_path(), std::ios::trunc) << "{\"type\": \"RunState\", \"value\": []}\n";
        CHECK_THROWS_AS(Rig(dir.path()).pipeline.resume(id), ResumeError);
        CHECK_THROWS_AS(Rig(dir.path()).pipeline.resume("run-000000000000"), ResumeError);
    }

    TEST_CASE("a held lock refuses a second writer") {
        testing::TempDir dir("pipe-lock");
        const auto id = make_run_id(sample_outline(), sample_config());
        RunLock held(dir.path() / id);
        CHECK_THROWS_AS(Rig(dir.path()).pipeline.run(sample_outline(), sample_config()), LockError);
    }

    TEST_CASE("review gate parks the run and re-enters on resume") {
        testing::TempDir dir("pipe-review");
        Rig rig(dir.path());
        const auto r = rig.pipeline.run(sample_outline(), sample_config(true));
        CHECK(r.status == RunStatus::awaiting_review);
        CHECK_FALSE(r.output);
        ProjectStore store(dir.path(), r.run_id);
        auto state = store.load_state();
        CHECK(state.stage == GlobalStage::awaiting_review);
        for (const auto& [i, p] : state.pages) CHECK(p.stage == PageStage::laid_out);
        const auto again = Rig(dir.path()).pipeline.resume(r.run_id);
        CHECK(again.status == RunStatus::awaiting_review);
        CHECK(store.load_state().count("run.await_review") == 2);
    }

    TEST_CASE("stage commands plan and paginate") {
        testing::TempDir dir("pipe-stages");
        Rig rig(dir.path());
        const auto m = rig.pipeline.plan(sample_outline(), sample_config());
        const auto id = make_run_id(sample_outline(), sample_config());
        CHECK(m.sections.size() == ProjectStore(dir.path(), id).get<Skeleton>("skeleton").concepts.size());
        const auto pages = rig.pipeline.paginate(id);
        REQUIRE_FALSE(pages.empty());
        for (std::size_t k = 0; k < pages.size(); ++k) CHECK(pages[k].page_index == static_cast<int>(k) + 1);
        const auto calls = rig.svc.gateway.stats().network_calls;
        CHECK(rig.pipeline.plan(sample_outline(), sample_config()) == m);
        CHECK(rig.pipeline.paginate(id) == pages);
        CHECK(rig.svc.gateway.stats().network_calls == calls);
        CHECK(rig.pipeline.run(sample_outline(), sample_config()).status == RunStatus::completed);
        const auto state = ProjectStore(dir.path(), id).load_state();
        CHECK(state.count("composer.refine") == 1);
        CHECK(state.count("paginator.paginate") == 1);
    }

    TEST_CASE("merge sums durations in page order") {
        testing::TempDir dir("merge");
        ManifestMuxer muxer;
        const std::vector<VideoSegment> segs = {
            {3, "v3", "a3", 30.0}, {1, "v1", "a1", 10.0}, {2, "v2", "a2", 20.0}};
        const auto art = merge(segs, 3, muxer, dir.path());
        CHECK(std::abs(art.total_duration_s() - 60.0) < 1e-9);
        REQUIRE(art.segments.size() == 3);
        CHECK(art.segments[0].page_index == 1);
        CHECK(art.segments[2].page_index == 3);
        const auto manifest = canonical_parse(*read_file(dir.path() / "merged.manifest"));
        const auto v = open_envelope(manifest, "MergeManifest");
        CHECK(v.at("segments").size() == 3);
        CHECK(v.at("segments")[1].at("video_ref") == "v2");
        CHECK(v.at("total_duration_s").get<double>() == 60.0);
    }

    TEST_CASE("manifest order follows page order for random page counts") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 50; ++trial) {
            testing::TempDir dir("merge-prop");
            const int n = std::uniform_int_distribution<int>(2, 20)(rng);
            std::vector<VideoSegment> segs;
            double sum = 0;
            for (int i = 1; i <= n; ++i) {
                const double d = std::uniform_int_distribution<int>(1, 90000)(rng) / 1000.0;
                segs.push_back({i, "v" + std::to_string(i), "a" + std::to_string(i), d});
                sum += d;
            }
            std::shuffle(segs.begin(), segs.end(), rng);
            ManifestMuxer muxer;
            const auto art = merge(segs, n, muxer, dir.path());
            const auto v = open_envelope(canonical_parse(*read_file(dir.path() / "merged.manifest")), "MergeManifest");
            REQUIRE(static_cast<int>(v.at("segments").size()) == n);
            for (int i = 0; i < n; ++i) {
                REQUIRE(v.at("segments")[i].at("page_index") == i + 1);
                REQUIRE(art.segments[i].page_index == i + 1);
            }
            REQUIRE(std::abs(v.at("total_duration_s").get<double>() - sum) <= 1e-6);
        }
    }

    TEST_CASE("single page is its own merge and gaps are named") {
        testing::TempDir dir("merge1");
        ManifestMuxer muxer;
        const auto art = merge({{1, "null://page-1", "a", 4.5}}, 1, muxer, dir.path());
        CHECK(art.merged_ref == "null://page-1");
        CHECK_FALSE(std::filesystem::exists(dir.path() / "merged.manifest"));
        try {
            merge({{1, "v1", "a", 1.0}, {3, "v3", "a", 1.0}}, 3, muxer, dir.path());
            FAIL("expected MergeError");
        } catch (const MergeError& e) {
            CHECK(e.detail() == "2");
        }
        CHECK_THROWS_AS(merge({{1, "", "a", 1.0}}, 1, muxer, dir.path()), MergeError);
        CHECK_THROWS_AS(merge({{1, "v", "a", 1.0}, {1, "w", "a", 1.0}}, 1, muxer, dir.path()), MergeError);
        CHECK_THROWS_AS(merge({}, 0, muxer, dir.path()), MergeError);
    }

    TEST_CASE("command muxer runs the template per page and once to concatenate") {
        testing::TempDir dir("mux");
        CommandBackend b;
        b.backend = "external";
        b.command = "echo {mode} >> calls.txt; touch {output}";
        auto muxer = make_muxer(b);
        const auto art = merge({{1, "v1", "a1", 1.0}, {2, "v2", "a2", 2.0}}, 2, *muxer, dir.path());
        CHECK(art.segments[0].video_ref == "segments/page_1.mp4");
        CHECK(art.merged_ref == "merged.mp4");
        CHECK(*read_file(dir.path() / "calls.txt") == "mux\nmux\nconcat\n");
        CHECK(std::filesystem::exists(dir.path() / "merged.mp4"));
        b.command = "exit 3";
        CHECK_THROWS_AS(merge({{1, "v1", "a1", 1.0}}, 1, *make_muxer(b), dir.path()), MergeError);
        b.backend = "ffmpeg";
        CHECK_THROWS_AS(make_muxer(b), ConfigError);
    }

    TEST_CASE("run state survives its canonical form") {
        RunState s;
        s.run_id = "run-abc";
        s.stage = GlobalStage::validated;
        s.pages[1] = {PageStage::final_, 2, true};
        s.pages[2] = {PageStage::laid_out, 0, false};
        s.log("composer.skeletonize");
        s.log("page.codegen", 1, "x");
        s.advance(1, PageStage::generated);
        CHECK(s.pages[1].stage == PageStage::final_);
        s.advance(GlobalStage::planned);
        CHECK(s.stage == GlobalStage::validated);
        CHECK(run_state_from_json(to_json(s)) == s);
        auto j = to_json(s);
        j["trace"][1]["seq"] = 5;
        CHECK_THROWS_AS(run_state_from_json(j), SchemaError);
        j = to_json(s);
        j["pages"]["1"]["stage"] = "baked";
        CHECK_THROWS_AS(run_state_from_json(j), SchemaError);
        CHECK(to_name(PageStage::final_) == "final");
    }
}
