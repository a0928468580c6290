#include <doctest.h>

#include "generators.hpp"
#include "lectern/core/serialize.hpp"

using namespace lectern;

TEST_SUITE("serialize") {
    TEST_CASE("empty manuscript round-trips") {
        Manuscript m;
        const auto text = serialize(m);
        CHECK(deserialize<Manuscript>(text) == m);
    }

    TEST_CASE("canonical layout is fixed") {
        AudioAsset a{3, std::nullopt, 120.0, 8.0 / 3.0};
        CHECK(serialize(a) ==
              "{\n"
              "  \"type\": \"AudioAsset\",\n"
              "  \"value\": {\n"
              "    \"duration_s\": 120.000000,\n"
              "    \"media_ref\": null,\n"
              "    \"page_index\": 3,\n"
              "    \"speaking_rate\": 2.666667\n"
              "  }\n"
              "}\n");
    }

    TEST_CASE("negative zero is normalized") {
        CHECK(format_real(-0.0) == "0.000000");
        CHECK(format_real(-1e-9) == "0.000000");
        CHECK(quantize(-1e-9) == 0.0);
        CHECK_FALSE(std::signbit(quantize(-1e-9)));
    }

    TEST_CASE("random scenes round-trip and serialization is canonical") {
        gen::Rng rng(7);
        for (int i = 0; i < 1000; ++i) {
            SceneProgram s = gen::scene(rng);
            s.source_text = gen::text(rng, 4);
            const auto text = serialize(s);
            const auto back = deserialize<SceneProgram>(text);
            REQUIRE(back == s);
            REQUIRE(serialize(back) == text);
        }
    }

    TEST_CASE("key order does not depend on input order") {
        const auto a = canonical_dump(canonical_parse(R"({"b": 1, "a": {"d": 2.5, "c": [1, 2]}})"));
        const auto b = canonical_dump(canonical_parse(R"({"a": {"c": [1, 2], "d": 2.5}, "b": 1})"));
        CHECK(a == b);
    }

    TEST_CASE("truncated stream is a parse error with a location") {
        Manuscript m;
        m.sections = {{"c1", "Heading", "Body text.", {}, {}}};
        m.recount();
        auto text = serialize(m);
        text.resize(text.size() - 6);
        try {
            (void)deserialize<Manuscript>(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() > 1);
            CHECK(std::string(e.what()).find("line") != std::string::npos);
        }
    }

    TEST_CASE("wrong type tag and bad fields are schema errors") {
        CHECK_THROWS_AS((void)deserialize<Manuscript>(serialize(Skeleton{})), SchemaError);
        CHECK_THROWS_AS((void)deserialize<Manuscript>(R"({"type": "Manuscript", "value": {"sections": 3}})"),
                        SchemaError);
        CHECK_THROWS_AS((void)deserialize<SceneProgram>(
                            R"({"type": "SceneProgram", "value": {"page_index": 1, "elements": [], "events": [],
                                "stage": "rendered"}})"),
                        SchemaError);
    }

    TEST_CASE("stale manuscript word count is rejected") {
        Manuscript m;
        m.sections = {{"c1", "H", "one two three", {}, {}}};
        m.recount();
        CHECK(m.word_count == 3);
        auto j = Json(m);
        j["word_count"] = 4;
        CHECK_THROWS_AS((void)deserialize<Manuscript>(canonical_dump(envelope("Manuscript", j))), SchemaError);
    }

    TEST_CASE("reals are quantized on read") {
        const auto s = deserialize<AudioAsset>(
            R"({"type": "AudioAsset", "value": {"page_index": 1, "media_ref": "a.wav", "duration_s": 1.23456789,
                "speaking_rate": 2}})");
        CHECK(s.duration_s == quantize(1.234568));
        CHECK(s.media_ref.value() == "a.wav");
    }

    TEST_CASE("edit sets use the delete key") {
        EditSet e{2, {{"f1", BBox{1, 2, 3, 4}, std::nullopt, false}, {"b1", std::nullopt, std::nullopt, true}},
                  "alice", "2026-01-01T00:00:00Z"};
        const auto text = serialize(e);
        CHECK(text.find("\"delete\": true") != std::string::npos);
        CHECK(deserialize<EditSet>(text) == e);
    }

    TEST_CASE("partial config documents fall back to defaults") {
        const auto c = deserialize<PipelineConfig>(R"({"type": "PipelineConfig", "value": {"seed": 9}})");
        PipelineConfig want;
        want.seed = 9;
        CHECK(c == want);
        CHECK(deserialize<PipelineConfig>(serialize(want)) == want);
    }

    TEST_CASE("enum names") {
        CHECK(to_name(SceneStage::final_) == "final");
        CHECK(from_name<SceneStage>("final") == SceneStage::final_);
        CHECK(from_name<VisualIntentKind>("image_placeholder") == VisualIntentKind::image_placeholder);
        CHECK_THROWS_AS(from_name<EventVerb>("explode"), SchemaError);
    }

    TEST_CASE("video artifact total sums in micro units") {
        VideoArtifact v;
        for (int i = 0; i < 10; ++i) v.segments.push_back({i + 1, "v", "a", 0.1});
        CHECK(v.total_duration_s() == 1.0);
    }
}
