#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "lectern/core/types.hpp"

namespace lectern::geom {

// One tick is half a canonical micro-unit (0.5e-6 scene units). A quantized
// BBox has its edges exactly on the tick lattice, so every layout predicate
// is decided in integers: touching boxes never count as overlapping because
// of binary floating-point noise.
inline constexpr std::int64_t kTicksPerUnit = 2'000'000;

std::int64_t to_ticks(double v);
double from_ticks(std::int64_t t);

struct TickBox {
    std::int64_t x0 = 0;  // left
    std::int64_t y0 = 0;  // bottom
    std::int64_t x1 = 0;  // right
    std::int64_t y1 = 0;  // top

    std::int64_t width() const { return x1 - x0; }
    std::int64_t height() const { return y1 - y0; }
    bool operator==(const TickBox&) const = default;
};

TickBox to_tick_box(const BBox& b);

// Smallest canonical BBox whose tick box contains `t`.
BBox to_bbox(const TickBox& t);

TickBox inflate(const TickBox& b, std::int64_t margin_ticks);

// Frame centered on the origin.
TickBox frame_box(const FrameSpec& frame);

// Intersection area in ticks^2; 0 when the boxes only touch or are disjoint.
__int128 intersection_area(const TickBox& a, const TickBox& b);
double area_to_u2(__int128 ticks2);

bool overlaps(const TickBox& a, const TickBox& b);
bool contains(const TickBox& outer, const TickBox& inner);

// Smallest canonical box covering all inputs; nullopt for an empty span.
std::optional<BBox> union_of(std::span<const BBox> boxes);

}  // namespace lectern::geom
