#include <doctest.h>

#include <fstream>

#include "generators.hpp"
#include "lectern/core/assets.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/fs.hpp"
#include "lectern/core/parallel.hpp"
#include "lectern/core/validate.hpp"
#include "support.hpp"

using namespace lectern;

namespace {

SceneProgram two_element_scene() {
    SceneProgram s;
    s.page_index = 1;
    s.elements = {{"title", ElementKind::text, "Gradient descent", {0, 3.8, 12, 0.8}, {}, {}},
                  {"f1", ElementKind::formula, "x_{t+1}", {0, 0, 4, 1}, {}, {}}};
    s.events = {{"a1", EventVerb::appear, {"title"}, 1.0, std::nullopt},
                {"a2", EventVerb::appear, {"f1"}, 1.0, std::nullopt}};
    return s;
}

bool has_code(const std::vector<Violation>& v, const std::string& code) {
    for (const auto& x : v)
        if (x.code == code) return true;
    return false;
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("well-formed scene has no violations") { CHECK(validate_scene(two_element_scene()).empty()); }

    TEST_CASE("dangling target is reported with its id") {
        auto s = two_element_scene();
        s.events[1].target_ids = {"x9"};
        const auto v = validate_scene(s);
        REQUIRE(v.size() == 1);
        CHECK(v[0].code == "dangling-target");
        CHECK(v[0].subject == "x9");
    }

    TEST_CASE("unsorted synced events") {
        auto s = two_element_scene();
        s.stage = SceneStage::synced;
        s.events[0].start_s = 3.0;
        s.events[1].start_s = 1.0;
        const auto v = validate_scene(s);
        REQUIRE(v.size() == 1);
        CHECK(v[0].code == "unsorted-events");
    }

    TEST_CASE("generated scenes may be unsorted and unscheduled") {
        auto s = two_element_scene();
        s.events[0].start_s = 3.0;
        s.events[1].start_s = 1.0;
        CHECK(validate_scene(s).empty());
    }

    TEST_CASE("structural violations") {
        auto s = two_element_scene();
        s.elements.push_back(s.elements[0]);
        s.elements[1].bbox.w = 0;
        s.elements[0].children = {"f1"};
        s.events[0].anchor_id = "a 1";
        s.events[1].anchor_id = "a2";
        s.events.push_back({"a2", EventVerb::highlight, {}, -1.0, -2.0});
        const auto v = validate_scene(s);
        CHECK(has_code(v, "duplicate-id"));
        CHECK(has_code(v, "malformed-bbox"));
        CHECK(has_code(v, "non-group-children"));
        CHECK(has_code(v, "invalid-anchor"));
        CHECK(has_code(v, "duplicate-anchor"));
        CHECK(has_code(v, "empty-targets"));
        CHECK(has_code(v, "negative-duration"));
        CHECK(has_code(v, "negative-start"));
    }

    TEST_CASE("group containment") {
        auto s = two_element_scene();
        s.elements.push_back({"g", ElementKind::group, "", {0, 0, 4, 1}, {}, {"f1"}});
        CHECK(validate_scene(s).empty());
        s.elements[2].children.push_back("title");
        CHECK(has_code(validate_scene(s), "group-containment"));
        s.elements[2].children.push_back("nope");
        CHECK(has_code(validate_scene(s), "dangling-child"));
    }

    TEST_CASE("synced scene needs every event scheduled") {
        auto s = two_element_scene();
        s.stage = SceneStage::synced;
        s.events[0].start_s = 0.0;
        CHECK(has_code(validate_scene(s), "unscheduled-event"));
    }

    TEST_CASE("stage never moves backwards") {
        auto s = two_element_scene();
        advance_stage(s, SceneStage::synced);
        advance_stage(s, SceneStage::synced);
        advance_stage(s, SceneStage::laid_out);
        CHECK(s.stage == SceneStage::laid_out);
        CHECK_THROWS_AS(advance_stage(s, SceneStage::debugged), ValidationError);
    }

    TEST_CASE("ids and language tags") {
        CHECK(is_valid_id("a_b.c-1"));
        CHECK_FALSE(is_valid_id(""));
        CHECK_FALSE(is_valid_id("a b"));
        CHECK_FALSE(is_valid_id("a@b"));
        CHECK(is_valid_language_tag("en"));
        CHECK(is_valid_language_tag("zh-Hans-CN"));
        CHECK(is_valid_language_tag("de-CH-1996"));
        CHECK_FALSE(is_valid_language_tag("english"));
        CHECK_FALSE(is_valid_language_tag(""));
    }

    TEST_CASE("outline and config validation") {
        LectureOutline o;
        CHECK_THROWS_AS(validate_outline(o), ValidationError);
        o.topic_keywords = {"gradient descent"};
        validate_outline(o);
        o.language = "not a tag";
        CHECK_THROWS_AS(validate_outline(o), ValidationError);

        PipelineConfig c;
        validate_config(c);
        c.dialect = "latex";
        CHECK_THROWS_AS(validate_config(c), ConfigError);
        c = {};
        c.retry_threshold = 0;
        CHECK_THROWS_AS(validate_config(c), ConfigError);
    }

    TEST_CASE("skeleton dependencies must point backwards") {
        Skeleton s{{{"a", "A", "", {}}, {"b", "B", "", {"a"}}}};
        validate_skeleton(s);
        s.concepts[0].depends_on = {"b"};
        CHECK_THROWS_AS(validate_skeleton(s), SchemaError);
        s.concepts[0].depends_on = {"a"};
        CHECK_THROWS_AS(validate_skeleton(s), SchemaError);
        CHECK_THROWS_AS(validate_skeleton(Skeleton{}), SchemaError);
    }

    TEST_CASE("atomic write replaces the file and leaves no temp files") {
        testing::TempDir dir;
        const auto p = dir.path() / "a" / "b" / "doc";
        write_atomic(p, "one");
        write_atomic(p, "two");
        CHECK(read_file(p).value() == "two");
        int files = 0;
        for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path()))
            if (e.is_regular_file()) ++files;
        CHECK(files == 1);
        CHECK_FALSE(read_file(dir.path() / "missing").has_value());
    }

    TEST_CASE("embedded assets") {
        CHECK(has_asset("prompts/composer/skeletonize"));
        CHECK(has_asset("dialects/manim-ce/header"));
        CHECK_FALSE(has_asset("prompts/none"));
        CHECK_THROWS(asset("prompts/none"));
        CHECK(fill_template("{{a}} and {{b}} {{c}}", {{"a", "x"}, {"b", "{{a}}"}}) == "x and {{a}} {{c}}");
    }

    TEST_CASE("parallel_for visits every index and reports the lowest failure") {
        std::vector<int> seen(100, 0);
        parallel_for(100, 4, [&](std::size_t i) { seen[i] += 1; });
        CHECK(std::count(seen.begin(), seen.end(), 1) == 100);
        try {
            parallel_for(50, 4, [&](std::size_t i) {
                if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
            });
            FAIL("expected a throw");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "7");
        }
    }
}
