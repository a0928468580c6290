#include "lectern/core/geometry.hpp"

#include <algorithm>

#include "lectern/core/canonical.hpp"

namespace lectern::geom {

namespace {

std::int64_t floor_to(std::int64_t v, std::int64_t m) {
    std::int64_t r = v % m;
    if (r < 0) r += m;
    return v - r;
}

std::int64_t ceil_to(std::int64_t v, std::int64_t m) { return -floor_to(-v, m); }

}  // namespace

std::int64_t to_ticks(double v) { return 2 * to_micro(v); }

double from_ticks(std::int64_t t) {
    return t % 2 == 0 ? from_micro(t / 2) : static_cast<double>(t) / 2e6 + 0.0;
}

TickBox to_tick_box(const BBox& b) {
    const std::int64_t cx = to_micro(b.cx), cy = to_micro(b.cy);
    const std::int64_t w = to_micro(b.w), h = to_micro(b.h);
    // Center in ticks is 2*c, half-size in ticks is the micro size.
    return {2 * cx - w, 2 * cy - h, 2 * cx + w, 2 * cy + h};
}

BBox to_bbox(const TickBox& t) {
    // Representable boxes have even width in ticks and x0 + x1 divisible by 4.
    // Picks the tightest such cover; even endpoints win ties.
    auto snap = [](std::int64_t lo, std::int64_t hi) {
        std::pair<std::int64_t, std::int64_t> best{0, 0};
        std::int64_t best_growth = -1;
        for (std::int64_t parity : {0, 1}) {
            const std::int64_t l = floor_to(lo - parity, 2) + parity;
            const std::int64_t h = ceil_to(hi - parity, 2) + parity;
            for (auto [cl, ch] : {std::pair{l, h}, std::pair{l, h + 2}, std::pair{l - 2, h}}) {
                if (floor_to(cl + ch, 4) != cl + ch) continue;
                const std::int64_t growth = (lo - cl) + (ch - hi);
                if (best_growth < 0 || growth < best_growth) {
                    best_growth = growth;
                    best = {cl, ch};
                }
            }
        }
        return best;
    };
    auto [x0, x1] = snap(t.x0, t.x1);
    auto [y0, y1] = snap(t.y0, t.y1);
    return {from_micro((x0 + x1) / 4), from_micro((y0 + y1) / 4), from_micro((x1 - x0) / 2),
            from_micro((y1 - y0) / 2)};
}

TickBox inflate(const TickBox& b, std::int64_t margin_ticks) {
    return {b.x0 - margin_ticks, b.y0 - margin_ticks, b.x1 + margin_ticks, b.y1 + margin_ticks};
}

TickBox frame_box(const FrameSpec& frame) {
    const std::int64_t w = to_micro(frame.width_u), h = to_micro(frame.height_u);
    return {-w, -h, w, h};
}

__int128 intersection_area(const TickBox& a, const TickBox& b) {
    const std::int64_t dx = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const std::int64_t dy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (dx <= 0 || dy <= 0) return 0;
    return static_cast<__int128>(dx) * dy;
}

double area_to_u2(__int128 ticks2) {
    return static_cast<double>(ticks2) / (static_cast<double>(kTicksPerUnit) * kTicksPerUnit);
}

bool overlaps(const TickBox& a, const TickBox& b) { return intersection_area(a, b) > 0; }

bool contains(const TickBox& outer, const TickBox& inner) {
    return inner.x0 >= outer.x0 && inner.x1 <= outer.x1 && inner.y0 >= outer.y0 &&
           inner.y1 <= outer.y1;
}

std::optional<BBox> union_of(std::span<const BBox> boxes) {
    if (boxes.empty()) return std::nullopt;
    TickBox u = to_tick_box(boxes.front());
    for (const auto& b : boxes.subspan(1)) {
        const TickBox m = to_tick_box(b);
        u.x0 = std::min(u.x0, m.x0);
        u.y0 = std::min(u.y0, m.y0);
        u.x1 = std::max(u.x1, m.x1);
        u.y1 = std::max(u.y1, m.y1);
    }
    return to_bbox(u);
}

}  // namespace lectern::geom
