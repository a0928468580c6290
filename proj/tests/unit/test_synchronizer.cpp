#include <doctest.h>

#include "generators.hpp"
#include "lectern/codegen/codegen.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/validate.hpp"
#include "lectern/narrator/narrator.hpp"
#include "lectern/synchronizer/synchronizer.hpp"
#include "sync_oracle.hpp"

using namespace lectern;
using namespace lectern::sync;

namespace {

const codegen::DialectSpec& manim() { return codegen::dialect("manim-ce"); }

SceneProgram two_events(double d1 = 0.0, double d2 = 0.0) {
    SceneProgram s;
    s.page_index = 1;
    s.elements = {{"x", ElementKind::text, "x", {0, 0, 1, 1}, {}, {}}, {"y", ElementKind::text, "y", {2, 0, 1, 1}, {}, {}}};
    s.events = {{"a1", EventVerb::appear, {"x"}, d1, std::nullopt}, {"a2", EventVerb::appear, {"y"}, d2, std::nullopt}};
    return s;
}

NarrationScript worked_script() {
    NarrationScript t;
    t.page_index = 1;
    t.units = {{"u1", "one two three four five six seven eight nine ten", "a1"}, {"u2", "one two three four five six", "a2"}};
    return t;
}

std::vector<oracle::Scheduled> actual(const SceneProgram& s) {
    std::vector<oracle::Scheduled> out;
    for (const auto& e : s.events)
        if (!(e.verb == EventVerb::wait && e.anchor_id.rfind(kWaitPrefix, 0) == 0))
            out.push_back({e.anchor_id, to_micro(*e.start_s)});
    return out;
}

}  // namespace

TEST_SUITE("synchronizer") {
    TEST_CASE("worked example: 10 and 6 words at 2 words per second") {
        narrator::MockTts tts(120);
        const auto script = worked_script();
        const auto synth = narrator::synthesize(script, "v", "en", tts);
        const auto r = align(two_events(), script, synth, manim());
        CHECK(r.warnings.empty());
        const auto& ev = r.scene.events;
        REQUIRE(ev.size() == 4);
        CHECK(ev[0].anchor_id == "a1");
        CHECK(*ev[0].start_s == 0.0);
        CHECK(ev[1].verb == EventVerb::wait);
        CHECK(ev[1].duration_s == 5.0);
        CHECK(ev[2].anchor_id == "a2");
        CHECK(*ev[2].start_s == 5.0);
        CHECK(*ev[3].start_s + ev[3].duration_s == 8.0);
        CHECK(synth.audio.duration_s == 8.0);
        CHECK(r.scene.stage == SceneStage::synced);
        CHECK(validate_scene(r.scene).empty());
        CHECK(check_sync(r.scene, synth).empty());
    }

    TEST_CASE("empty script with one event") {
        SceneProgram s = two_events(1.0);
        s.events.pop_back();
        const auto r = align(s, NarrationScript{}, SynthesisResult{}, manim());
        REQUIRE(r.scene.events.size() == 1);
        CHECK(*r.scene.events[0].start_s == 0.0);
        CHECK(r.scene.events[0].duration_s == 0.0);
        CHECK_FALSE(r.warnings.empty());
    }

    TEST_CASE("no references spreads events uniformly with a warning") {
        SceneProgram s = two_events();
        s.events.push_back({"a3", EventVerb::highlight, {"x"}, 0.0, std::nullopt});
        NarrationScript t = worked_script();
        for (auto& u : t.units) u.anchor_ref.reset();
        const auto synth = narrator::synthesize(t, "v", "en", *std::make_unique<narrator::MockTts>(120));
        const auto r = align(s, t, synth, manim());
        CHECK_FALSE(r.warnings.empty());
        const auto got = actual(r.scene);
        REQUIRE(got.size() == 3);
        CHECK(got[0].start_micro == 0);
        CHECK(got[1].start_micro == 4'000'000);
        CHECK(got[2].start_micro == 8'000'000);
    }

    TEST_CASE("unknown anchor is a SyncError") {
        auto t = worked_script();
        t.units[0].anchor_ref = "nope";
        narrator::MockTts tts(120);
        CHECK_THROWS_AS(align(two_events(), t, narrator::synthesize(t, "v", "en", tts), manim()), SyncError);
    }

    TEST_CASE("long animations are cut at the next start") {
        narrator::MockTts tts(120);
        const auto script = worked_script();
        const auto synth = narrator::synthesize(script, "v", "en", tts);
        const auto r = align(two_events(7.0, 9.0), script, synth, manim());
        CHECK(r.scene.events[0].duration_s == 5.0);
        CHECK(r.scene.events[1].duration_s == 3.0);
        CHECK(r.scene.events.size() == 2);
    }

    TEST_CASE("emitted source carries the schedule") {
        narrator::MockTts tts(120);
        const auto script = worked_script();
        const auto synth = narrator::synthesize(script, "v", "en", tts);
        const auto r = align(two_events(1.0, 1.0), script, synth, manim());
        const auto parsed = codegen::parse_emitted(r.scene.source_text, manim());
        REQUIRE(parsed.events.size() == r.scene.events.size());
        for (std::size_t i = 0; i < parsed.events.size(); ++i) {
            CHECK(parsed.events[i].anchor_id == r.scene.events[i].anchor_id);
            CHECK(parsed.events[i].start_s == r.scene.events[i].start_s);
        }
    }

    TEST_CASE("fuzzed triples match the brute-force scheduler") {
        gen::Rng rng(31);
        for (int i = 0; i < 300; ++i) {
            const auto x = oracle::random_triple(rng);
            const auto r = align(x.scene, x.script, x.synth, manim());
            REQUIRE(actual(r.scene) == oracle::schedule(x.scene, x.script, x.synth));
            REQUIRE(validate_scene(r.scene).empty());
            REQUIRE(check_sync(r.scene, x.synth).empty());
            const auto again = align(r.scene, x.script, x.synth, manim());
            REQUIRE(again.scene == r.scene);
            // Timeline is contiguous from 0 to the audio end.
            std::int64_t clock = 0;
            for (const auto& e : r.scene.events) {
                REQUIRE(to_micro(*e.start_s) >= clock - 0);
                REQUIRE(to_micro(*e.start_s) <= to_micro(x.synth.audio.duration_s));
                clock = std::max(clock, to_micro(*e.start_s) + to_micro(e.duration_s));
            }
            REQUIRE(clock <= to_micro(x.synth.audio.duration_s));
        }
    }

    TEST_CASE("drift report") {
        SceneProgram s = two_events(1.0, 1.0);
        s.stage = SceneStage::synced;
        s.events[0].start_s = 0.0;
        s.events[1].start_s = 10.0;
        SynthesisResult synth;
        synth.audio.duration_s = 8.0;
        const auto r = check_sync(s, synth);
        REQUIRE(r.overruns.size() == 1);
        CHECK(r.overruns[0].anchor_id == "a2");
        CHECK(r.overruns[0].excess_s == 2.0);
        CHECK(r.drift_s == 3.0);
        CHECK_FALSE(r.empty());
        s.events[1].start_s = 6.95;
        CHECK(check_sync(s, synth).empty());
        s.events[1].start_s.reset();
        CHECK_THROWS_AS(check_sync(s, synth), SyncError);
    }

    TEST_CASE("fuzzed drift reports agree with a recomputation") {
        gen::Rng rng(37);
        for (int i = 0; i < 300; ++i) {
            SceneProgram s = gen::scene(rng);
            if (s.stage != SceneStage::synced) continue;
            SynthesisResult synth;
            synth.audio.duration_s = gen::micro_real(rng, 0, 20);
            const auto r = check_sync(s, synth);
            double last_end = 0;
            int overruns = 0;
            for (const auto& e : s.events) {
                last_end = std::max(last_end, *e.start_s + e.duration_s);
                overruns += *e.start_s > synth.audio.duration_s;
            }
            REQUIRE(std::abs(r.drift_s - std::abs(last_end - synth.audio.duration_s)) < 1e-9);
            REQUIRE(static_cast<int>(r.overruns.size()) == overruns);
        }
    }
}
