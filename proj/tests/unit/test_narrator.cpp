#include <doctest.h>

#include "generators.hpp"
#include "lectern/codegen/codegen.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/validate.hpp"
#include "lectern/core/words.hpp"
#include "lectern/narrator/narrator.hpp"
#include "support.hpp"

using namespace lectern;
using namespace lectern::narrator;

namespace {

PageBlueprint page(int index) {
    PageBlueprint p;
    p.page_index = index;
    p.title = "Learning rate";
    p.bullet_points = {"Too small is slow", "Too large diverges"};
    p.source_span = {0, 1};
    p.est_density = 2;
    return p;
}

NarrationScript script_of(std::vector<std::string> texts, int page_index = 1) {
    NarrationScript s;
    s.page_index = page_index;
    for (std::size_t i = 0; i < texts.size(); ++i) s.units.push_back({"u" + std::to_string(i + 1), texts[i], std::nullopt});
    return s;
}

std::string n_words(int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " w" : "w");
    return s;
}

}  // namespace

TEST_SUITE("narrator") {
    TEST_CASE("first page has no look-back and later pages see only the last two units") {
        testing::MockServices svc;
        const auto scene = codegen::generate_scene(page(1), FrameSpec{}, codegen::dialect("ir-json"), svc.client);
        const auto first = build_narration_request(page(1), scene, std::nullopt, "en");
        CHECK(first.input.at("previous").empty());
        CHECK(first.prompt.messages[1].content.find("(start of lecture)") != std::string::npos);

        const auto prev = script_of({"ALPHA unit.", "BRAVO unit.", "CHARLIE unit."});
        const auto later = build_narration_request(page(2), scene, prev, "en");
        const auto& text = later.prompt.messages[1].content;
        CHECK(text.find("ALPHA") == std::string::npos);
        CHECK(text.find("BRAVO") != std::string::npos);
        CHECK(text.find("CHARLIE") != std::string::npos);
        CHECK(later.input.at("previous").size() == 2);
    }

    TEST_CASE("template narration follows the scene and resolves anchors") {
        testing::MockServices svc;
        const auto scene = codegen::generate_scene(page(1), FrameSpec{}, codegen::dialect("ir-json"), svc.client);
        const auto s1 = compose_narration(page(1), scene, std::nullopt, "en", svc.client);
        REQUIRE(s1.units.size() == 4);
        CHECK(s1.units[0].anchor_ref == "a_title");
        CHECK(s1.units[1].anchor_ref == "a_b1");
        CHECK(s1.units[1].text.find("Too small is slow") == 0);
        CHECK_FALSE(s1.units.back().anchor_ref.has_value());
        CHECK(validate_narration(s1, scene).empty());
        const auto s2 = compose_narration(page(2), scene, s1, "en", svc.client);
        CHECK(s2.units[0].text.find("Building on") == 0);
    }

    TEST_CASE("ghost anchor is a NarrateError") {
        testing::MockServices svc(testing::patched_llm([](const std::string& purpose, const Json&, Json& a) {
            if (purpose == "narrator.narrate") a["units"][0]["anchor_ref"] = "ghost";
        }));
        const auto scene = codegen::generate_scene(page(1), FrameSpec{}, codegen::dialect("ir-json"), svc.client);
        CHECK_THROWS_AS(compose_narration(page(1), scene, std::nullopt, "en", svc.client), NarrateError);
    }

    TEST_CASE("mock tts arithmetic") {
        MockTts tts(160);
        const auto r = synthesize(script_of({n_words(320)}), "default", "en", tts);
        CHECK(r.audio.duration_s == 120.0);
        CHECK(format_real(r.audio.speaking_rate) == "2.666667");
        CHECK_FALSE(r.audio.media_ref.has_value());

        MockTts slow(120);
        const auto two = synthesize(script_of({n_words(10), n_words(6)}), "default", "en", slow);
        CHECK(two.per_unit_durations_s == std::vector<double>{5.0, 3.0});
        CHECK(two.audio.duration_s == 8.0);
        CHECK(two.audio.speaking_rate == 2.0);
    }

    TEST_CASE("mock tts sums exactly and keeps the rate consistent") {
        gen::Rng rng(23);
        for (int i = 0; i < 300; ++i) {
            std::vector<std::string> texts;
            const int n = gen::uniform_int(rng, 1, 9);
            for (int k = 0; k < n; ++k) texts.push_back(n_words(gen::uniform_int(rng, 1, 40)));
            const double wpm = gen::uniform_int(rng, 60, 240);
            MockTts tts(wpm);
            const auto script = script_of(texts);
            const auto r = synthesize(script, "v", "en", tts);
            std::int64_t sum = 0;
            for (double d : r.per_unit_durations_s) sum += to_micro(d);
            REQUIRE(sum == to_micro(r.audio.duration_s));
            REQUIRE(std::abs(r.audio.speaking_rate * r.audio.duration_s - script.word_count()) <= 1e-6);
            REQUIRE(r == synthesize(script, "v", "en", tts));
        }
    }

    TEST_CASE("service tts goes through the gateway and is validated") {
        auto tts = std::make_shared<mock::FunctionTransport>([](const gateway::ServiceRequest& r) {
            const auto in = canonical_parse(r.payload);
            CHECK(in.at("voice_id") == "narrator-1");
            Json durations = Json::array();
            double total = 0;
            for (std::size_t i = 0; i < in.at("units").size(); ++i) {
                durations.push_back(1.5);
                total += 1.5;
            }
            return canonical_dump({{"duration_s", total}, {"per_unit_durations_s", durations}, {"media_ref", "a.wav"}});
        });
        gateway::Gateway gw(testing::quiet_options(), nullptr, tts);
        ServiceTts backend(gw, {});
        const auto r = synthesize(script_of({"one two three", "four five six"}), "narrator-1", "en", backend);
        CHECK(r.audio.duration_s == 3.0);
        CHECK(r.audio.media_ref == "a.wav");
        CHECK(r.audio.speaking_rate == 2.0);
        CHECK(gw.stats().network_calls == 1);
    }

    TEST_CASE("inconsistent backend answers are TtsErrors") {
        auto bad = std::make_shared<mock::FunctionTransport>([](const gateway::ServiceRequest&) {
            return canonical_dump({{"duration_s", 5.0}, {"per_unit_durations_s", {1.0, 1.0}}, {"media_ref", nullptr}});
        });
        gateway::Gateway gw(testing::quiet_options(), nullptr, bad);
        ServiceTts backend(gw, {});
        CHECK_THROWS_AS(synthesize(script_of({"a", "b"}), "v", "en", backend), TtsError);
        CHECK_THROWS_AS(synthesize(script_of({"a"}), "v", "en", backend), TtsError);

        auto down = std::make_shared<mock::FunctionTransport>(
            [](const gateway::ServiceRequest&) -> std::string { throw TransportError("503"); });
        gateway::Gateway gw2(testing::quiet_options(), nullptr, down);
        ServiceTts backend2(gw2, {});
        CHECK_THROWS_AS(synthesize(script_of({"a"}), "v", "en", backend2), TtsError);
    }
}
