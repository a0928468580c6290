#include "lectern/layout/layout.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"

namespace lectern::layout {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::vector<const SceneElement*> leaves(const SceneProgram& scene) {
    std::vector<const SceneElement*> out;
    for (const auto& e : scene.elements)
        if (e.kind != ElementKind::group) out.push_back(&e);
    std::sort(out.begin(), out.end(), [](const SceneElement* a, const SceneElement* b) { return a->id < b->id; });
    return out;
}

geom::TickBox inflated(const BBox& b, double margin_u) {
    return geom::inflate(geom::to_tick_box(b), geom::to_ticks(margin_u));
}

}  // namespace

OccupancyGrid::OccupancyGrid(const FrameSpec& frame, double cell_u)
    : frame_(geom::frame_box(frame)), cell_u_(cell_u), cell_ticks_(geom::to_ticks(cell_u)) {
    if (cell_ticks_ <= 0) throw ConfigError("cell size must be positive");
    cols_ = static_cast<int>(ceil_div(frame_.width(), cell_ticks_));
    rows_ = static_cast<int>(ceil_div(frame_.height(), cell_ticks_));
}

geom::TickBox OccupancyGrid::cell_box(int col, int row) const {
    const auto [x, y] = corner(col, row);
    return {x, y - cell_ticks_, x + cell_ticks_, y};
}

std::pair<std::int64_t, std::int64_t> OccupancyGrid::corner(int col, int row) const {
    return {frame_.x0 + col * cell_ticks_, frame_.y1 - row * cell_ticks_};
}

std::pair<int, int> OccupancyGrid::cell_of(std::int64_t x, std::int64_t y) const {
    const auto c = std::clamp<std::int64_t>(floor_div(x - frame_.x0, cell_ticks_), 0, cols_ - 1);
    const auto r = std::clamp<std::int64_t>(floor_div(frame_.y1 - y, cell_ticks_), 0, rows_ - 1);
    return {static_cast<int>(c), static_cast<int>(r)};
}

std::vector<std::pair<int, int>> OccupancyGrid::cells_under(const geom::TickBox& box) const {
    std::vector<std::pair<int, int>> out;
    const auto c0 = std::max<std::int64_t>(0, floor_div(box.x0 - frame_.x0, cell_ticks_));
    const auto c1 = std::min<std::int64_t>(cols_ - 1, ceil_div(box.x1 - frame_.x0, cell_ticks_) - 1);
    const auto r0 = std::max<std::int64_t>(0, floor_div(frame_.y1 - box.y1, cell_ticks_));
    const auto r1 = std::min<std::int64_t>(rows_ - 1, ceil_div(frame_.y1 - box.y0, cell_ticks_) - 1);
    for (auto r = r0; r <= r1; ++r)
        for (auto c = c0; c <= c1; ++c)
            if (geom::overlaps(box, cell_box(static_cast<int>(c), static_cast<int>(r))))
                out.emplace_back(static_cast<int>(c), static_cast<int>(r));
    return out;
}

void OccupancyGrid::occupy(const geom::TickBox& box) {
    for (const auto& cell : cells_under(box)) occupied_.insert(cell);
}

bool OccupancyGrid::is_free(const geom::TickBox& box) const {
    const auto cells = cells_under(box);
    return std::none_of(cells.begin(), cells.end(), [&](const auto& c) { return occupied_.count(c) > 0; });
}

bool is_title(const std::string& id) { return id.rfind("title", 0) == 0; }

ConflictReport detect_conflicts(const SceneProgram& scene, const FrameSpec& frame, double margin_u) {
    ConflictReport report;
    report.page_index = scene.page_index;
    const auto items = leaves(scene);
    const auto m = geom::to_ticks(margin_u);
    std::vector<geom::TickBox> raw, infl;
    for (const auto* e : items) {
        raw.push_back(geom::to_tick_box(e->bbox));
        infl.push_back(geom::inflate(raw.back(), m));
    }
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const auto area = geom::intersection_area(infl[i], infl[j]);
            if (area > 0) report.overlaps.push_back({items[i]->id, items[j]->id, geom::area_to_u2(area)});
        }
    const auto f = geom::frame_box(frame);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& b = raw[i];
        Overflow o{items[i]->id, {}, 0.0};
        std::int64_t excess = 0;
        auto edge = [&](FrameEdge e, std::int64_t over) {
            if (over <= 0) return;
            o.violated_edges.push_back(e);
            excess = std::max(excess, over);
        };
        edge(FrameEdge::left, f.x0 - b.x0);
        edge(FrameEdge::right, b.x1 - f.x1);
        edge(FrameEdge::top, b.y1 - f.y1);
        edge(FrameEdge::bottom, f.y0 - b.y0);
        if (excess > 0) {
            o.excess_u = geom::from_ticks(excess);
            report.overflows.push_back(std::move(o));
        }
    }
    return report;
}

__int128 severity(const SceneProgram& scene, const FrameSpec& frame, double margin_u, const std::string& id) {
    const SceneElement* self = scene.find_element(id);
    if (!self || self->kind == ElementKind::group) return 0;
    const auto m = geom::to_ticks(margin_u);
    const auto raw = geom::to_tick_box(self->bbox);
    const auto mine = geom::inflate(raw, m);
    __int128 total = 0;
    for (const auto& e : scene.elements)
        if (e.kind != ElementKind::group && e.id != id)
            total += geom::intersection_area(mine, geom::inflate(geom::to_tick_box(e.bbox), m));
    const auto f = geom::frame_box(frame);
    const std::int64_t excess =
        std::max({std::int64_t{0}, f.x0 - raw.x0, raw.x1 - f.x1, raw.y1 - f.y1, f.y0 - raw.y0});
    return total + static_cast<__int128>(excess) * geom::kTicksPerUnit;
}

BBox place_at(const BBox& current, std::int64_t corner_x, std::int64_t corner_y, double margin_u) {
    const auto m = geom::to_ticks(margin_u);
    const std::int64_t w = to_micro(current.w), h = to_micro(current.h);
    // Raw edges in ticks; center in ticks is edge + half size, and half size
    // in ticks equals the size in micro.
    const std::int64_t cx_micro = ceil_div(corner_x + m + w, 2);
    const std::int64_t cy_micro = floor_div(corner_y - m - h, 2);
    return {from_micro(cx_micro), from_micro(cy_micro), current.w, current.h};
}

PlacementPlan retrieve_positions(const ConflictReport& report, const SceneProgram& scene, const FrameSpec& frame,
                                 ScanOrder order, double cell_u, double margin_u) {
    (void)order;  // the only order: horizontal-right, then vertical-down
    PlacementPlan plan;
    std::set<std::string> conflicted;
    for (const auto& o : report.overlaps) conflicted.insert({o.a, o.b});
    for (const auto& o : report.overflows) conflicted.insert(o.element_id);
    if (conflicted.empty()) return plan;

    std::vector<std::pair<__int128, std::string>> queue;
    for (const auto& id : conflicted) {
        const SceneElement* e = scene.find_element(id);
        if (!e || e->kind == ElementKind::group || is_title(id)) continue;
        queue.emplace_back(severity(scene, frame, margin_u, id), id);
    }
    std::sort(queue.begin(), queue.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });

    const auto f = geom::frame_box(frame);
    std::set<std::string> stuck;
    for (;;) {
        OccupancyGrid grid(frame, cell_u);
        for (const auto& e : scene.elements) {
            if (e.kind == ElementKind::group) continue;
            const bool moving = std::any_of(queue.begin(), queue.end(), [&](const auto& q) { return q.second == e.id; });
            if (!moving || stuck.count(e.id)) grid.occupy(inflated(e.bbox, margin_u));
        }
        plan.moves.clear();
        std::set<std::string> next_stuck = stuck;
        const int cells = grid.cols() * grid.rows();
        for (const auto& [sev, id] : queue) {
            if (stuck.count(id)) continue;
            const SceneElement* e = scene.find_element(id);
            const auto here = inflated(e->bbox, margin_u);
            const auto [c0, r0] = grid.cell_of(here.x0, here.y1);
            const int start = r0 * grid.cols() + c0;
            bool placed = false;
            for (int k = 0; k < cells && !placed; ++k) {
                const int idx = (start + k) % cells;
                const auto [x, y] = grid.corner(idx % grid.cols(), idx / grid.cols());
                const BBox candidate = place_at(e->bbox, x, y, margin_u);
                const auto box = inflated(candidate, margin_u);
                if (!geom::contains(f, box) || !grid.is_free(box)) continue;
                plan.moves.push_back({id, candidate});
                grid.occupy(box);
                placed = true;
            }
            if (!placed) next_stuck.insert(id);
        }
        if (next_stuck == stuck) break;
        stuck = std::move(next_stuck);
    }
    for (const auto& [sev, id] : queue)
        if (stuck.count(id)) plan.unresolved.push_back(id);

    // Titles that still conflict once every move is applied cannot be fixed.
    SceneProgram moved = scene;
    for (const auto& mv : plan.moves) moved.find_element(mv.element_id)->bbox = mv.new_bbox;
    const auto after = detect_conflicts(moved, frame, margin_u);
    std::set<std::string> titles;
    for (const auto& o : after.overlaps)
        for (const auto* id : {&o.a, &o.b})
            if (is_title(*id) && conflicted.count(*id)) titles.insert(*id);
    for (const auto& o : after.overflows)
        if (is_title(o.element_id)) titles.insert(o.element_id);
    plan.unresolved.insert(plan.unresolved.end(), titles.begin(), titles.end());
    return plan;
}

void recompute_groups(SceneProgram& scene) {
    std::map<std::string, int> depth;
    std::function<int(const std::string&, int)> depth_of = [&](const std::string& id, int guard) -> int {
        const SceneElement* e = scene.find_element(id);
        if (!e || e->kind != ElementKind::group || guard > static_cast<int>(scene.elements.size())) return 0;
        int d = 0;
        for (const auto& c : e->children) d = std::max(d, 1 + depth_of(c, guard + 1));
        return d;
    };
    std::vector<std::pair<int, std::size_t>> groups;
    for (std::size_t i = 0; i < scene.elements.size(); ++i)
        if (scene.elements[i].kind == ElementKind::group) groups.emplace_back(depth_of(scene.elements[i].id, 0), i);
    std::sort(groups.begin(), groups.end());
    for (const auto& [d, i] : groups) {
        std::vector<BBox> boxes;
        for (const auto& c : scene.elements[i].children)
            if (const SceneElement* child = scene.find_element(c)) boxes.push_back(child->bbox);
        if (auto u = geom::union_of(boxes)) scene.elements[i].bbox = *u;
    }
}

SceneProgram apply_layout(const SceneProgram& scene, const PlacementPlan& plan, const codegen::DialectSpec& dialect) {
    SceneProgram out = scene;
    for (const auto& mv : plan.moves) {
        SceneElement* e = out.find_element(mv.element_id);
        if (!e) throw ApplyError("placement moves missing element '" + mv.element_id + "'");
        if (e->kind == ElementKind::group) throw ApplyError("placement cannot move group '" + mv.element_id + "'");
        e->bbox = mv.new_bbox;
    }
    if (!plan.moves.empty()) recompute_groups(out);
    if (out.stage < SceneStage::laid_out) out.stage = SceneStage::laid_out;
    out.source_text = codegen::emit(out, dialect);
    return out;
}

EditResult apply_human_edits(const SceneProgram& scene, const EditSet& edits, const FrameSpec& frame,
                             double margin_u, const codegen::DialectSpec& dialect) {
    if (edits.page_index != scene.page_index)
        throw EditError("edit set for page " + std::to_string(edits.page_index) + " applied to page " +
                        std::to_string(scene.page_index));
    SceneProgram out = scene;
    std::set<std::string> deleted;
    bool moved = false;
    for (const auto& edit : edits.edits) {
        SceneElement* e = out.find_element(edit.element_id);
        if (!e || deleted.count(edit.element_id))
            throw EditError("edit names missing element '" + edit.element_id + "'", edit.element_id);
        if (edit.del) {
            deleted.insert(edit.element_id);
            continue;
        }
        if (edit.new_bbox) {
            if (e->kind == ElementKind::group)
                throw EditError("group '" + edit.element_id + "' is positioned by its children; move them instead",
                                edit.element_id);
            if (!(edit.new_bbox->w > 0) || !(edit.new_bbox->h > 0))
                throw EditError("edit gives element '" + edit.element_id + "' a degenerate bbox", edit.element_id);
            e->bbox = *edit.new_bbox;
            moved = true;
        }
        if (edit.new_content) e->content = *edit.new_content;
    }
    if (!deleted.empty()) {
        std::erase_if(out.elements, [&](const SceneElement& e) { return deleted.count(e.id) > 0; });
        for (auto& e : out.elements)
            std::erase_if(e.children, [&](const std::string& c) { return deleted.count(c) > 0; });
        std::vector<AnimationEvent> events;
        for (auto& ev : out.events) {
            const bool had_targets = !ev.target_ids.empty();
            std::erase_if(ev.target_ids, [&](const std::string& t) { return deleted.count(t) > 0; });
            if (had_targets && ev.target_ids.empty()) continue;
            events.push_back(std::move(ev));
        }
        out.events = std::move(events);
    }
    if (moved || !deleted.empty()) recompute_groups(out);
    out.stage = SceneStage::final_;
    out.source_text = codegen::emit(out, dialect);
    return {out, detect_conflicts(out, frame, margin_u)};
}

}  // namespace lectern::layout
