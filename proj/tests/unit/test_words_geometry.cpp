#include <doctest.h>

#include <boost/rational.hpp>

#include "generators.hpp"
#include "lectern/core/geometry.hpp"
#include "lectern/core/words.hpp"

using namespace lectern;

TEST_SUITE("words") {
    TEST_CASE("whitespace tokens") {
        CHECK(count_words("") == 0);
        CHECK(count_words("one two  three\nfour") == 4);
        CHECK(count_words("Hello, world!") == 2);
        CHECK(count_words("a - b -- c ...") == 3);
        CHECK(count_words("x_{t+1} = x_t") == 2);
        CHECK(count_words("50% 3.14") == 2);
    }

    TEST_CASE("han characters count individually") {
        // 梯度下降 (4 Han characters)
        CHECK(count_words("\xE6\xA2\xAF\xE5\xBA\xA6\xE4\xB8\x8B\xE9\x99\x8D") == 4);
        // 梯度，下降。 : punctuation does not count
        CHECK(count_words("\xE6\xA2\xAF\xE5\xBA\xA6\xEF\xBC\x8C\xE4\xB8\x8B\xE9\x99\x8D\xE3\x80\x82") == 4);
        // SGD梯度 : one latin run plus two Han characters
        CHECK(count_words("SGD\xE6\xA2\xAF\xE5\xBA\xA6") == 3);
    }

    TEST_CASE("invalid utf-8 does not crash") { CHECK(count_words("ab\xff\xfe cd") == 2); }
}

namespace {

using Q = boost::rational<long long>;

// Exact value of a canonical decimal.
Q exact(double v) { return Q(to_micro(v), 1'000'000); }

}  // namespace

TEST_SUITE("geometry") {
    TEST_CASE("tick boxes are exact") {
        const BBox b{0.1, -0.3, 0.2, 0.4};
        const auto t = geom::to_tick_box(b);
        CHECK(t.x0 == 0);
        CHECK(t.x1 == 400'000);
        CHECK(t.y0 == -1'000'000);
        CHECK(t.y1 == -200'000);
    }

    TEST_CASE("touching boxes do not overlap") {
        const auto a = geom::to_tick_box({0, 0, 2, 1});
        const auto b = geom::to_tick_box({2, 0, 2, 1});
        CHECK(geom::intersection_area(a, b) == 0);
        CHECK_FALSE(geom::overlaps(a, b));
        const auto c = geom::to_tick_box({0.1, 0.2, 0.3, 0.1});
        const auto d = geom::to_tick_box({0.4, 0.2, 0.3, 0.1});
        CHECK_FALSE(geom::overlaps(c, d));
    }

    TEST_CASE("intersection area matches exact rationals") {
        gen::Rng rng(11);
        for (int i = 0; i < 2000; ++i) {
            const BBox a = gen::bbox(rng, 3, 3, 4, 4), b = gen::bbox(rng, 3, 3, 4, 4);
            const Q two(2);
            const Q ix = std::max(Q(0), std::min(exact(a.cx) + exact(a.w) / two, exact(b.cx) + exact(b.w) / two) -
                                            std::max(exact(a.cx) - exact(a.w) / two, exact(b.cx) - exact(b.w) / two));
            const Q iy = std::max(Q(0), std::min(exact(a.cy) + exact(a.h) / two, exact(b.cy) + exact(b.h) / two) -
                                            std::max(exact(a.cy) - exact(a.h) / two, exact(b.cy) - exact(b.h) / two));
            const auto ticks = geom::intersection_area(geom::to_tick_box(a), geom::to_tick_box(b));
            // ticks^2 -> u^2 : divide by (2e6)^2
            REQUIRE(Q(static_cast<long long>(ticks), 1) / Q(4'000'000'000'000LL) == ix * iy);
        }
    }

    TEST_CASE("to_bbox covers the tick box") {
        gen::Rng rng(5);
        for (int i = 0; i < 1000; ++i) {
            geom::TickBox t{gen::uniform_int(rng, -5'000'000, 5'000'000), gen::uniform_int(rng, -5'000'000, 5'000'000), 0,
                            0};
            t.x1 = t.x0 + gen::uniform_int(rng, 1, 3'000'000);
            t.y1 = t.y0 + gen::uniform_int(rng, 1, 3'000'000);
            const auto back = geom::to_tick_box(geom::to_bbox(t));
            REQUIRE(geom::contains(back, t));
            REQUIRE(back.width() - t.width() <= 3);
            REQUIRE(back.height() - t.height() <= 3);
        }
    }

    TEST_CASE("frame and containment") {
        const auto f = geom::frame_box(FrameSpec{});
        CHECK(geom::contains(f, geom::to_tick_box({0, 0, 16, 9})));
        CHECK_FALSE(geom::contains(f, geom::to_tick_box({0.000001, 0, 16, 9})));
        CHECK(geom::inflate(geom::to_tick_box({0, 0, 1, 1}), geom::to_ticks(0.1)) == geom::to_tick_box({0, 0, 1.2, 1.2}));
    }

    TEST_CASE("union of boxes") {
        const BBox boxes[] = {{0, 0, 2, 2}, {3, 1, 2, 2}};
        const auto u = geom::union_of(boxes).value();
        CHECK(u == BBox{1.5, 0.5, 5, 3});
        CHECK_FALSE(geom::union_of(std::span<const BBox>{}).has_value());
    }
}
