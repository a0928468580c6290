#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lectern/codegen/codegen.hpp"
#include "lectern/core/geometry.hpp"
#include "lectern/core/types.hpp"

namespace lectern::layout {

inline constexpr double kDefaultCellU = 0.25;

// Cell (col, row) covers [left + col*cell, left + (col+1)*cell] horizontally
// and [top - (row+1)*cell, top - row*cell] vertically; row 0 is the top row.
class OccupancyGrid {
public:
    OccupancyGrid(const FrameSpec& frame, double cell_u);

    int cols() const { return cols_; }
    int rows() const { return rows_; }
    double cell_u() const { return cell_u_; }
    const std::set<std::pair<int, int>>& occupied() const { return occupied_; }

    geom::TickBox cell_box(int col, int row) const;
    // Top-left corner of a cell in ticks.
    std::pair<std::int64_t, std::int64_t> corner(int col, int row) const;
    // Cell holding a tick point, clamped into the grid.
    std::pair<int, int> cell_of(std::int64_t x, std::int64_t y) const;

    // Every cell whose area meets `box` with positive area.
    std::vector<std::pair<int, int>> cells_under(const geom::TickBox& box) const;
    void occupy(const geom::TickBox& box);
    bool is_free(const geom::TickBox& box) const;

private:
    geom::TickBox frame_;
    double cell_u_;
    std::int64_t cell_ticks_;
    int cols_;
    int rows_;
    std::set<std::pair<int, int>> occupied_;
};

// Elements whose id starts with "title" never move.
bool is_title(const std::string& id);

ConflictReport detect_conflicts(const SceneProgram& scene, const FrameSpec& frame, double margin_u);

// Exact severity used to order conflicted elements, in ticks^2: overlap areas
// plus overflow excess scaled by one unit of ticks.
__int128 severity(const SceneProgram& scene, const FrameSpec& frame, double margin_u, const std::string& id);

// Box an element gets when its margin-inflated top-left corner is placed at
// the given tick corner; the center is rounded to the canonical grid toward
// the inside of that corner.
BBox place_at(const BBox& current, std::int64_t corner_x, std::int64_t corner_y, double margin_u);

PlacementPlan retrieve_positions(const ConflictReport& report, const SceneProgram& scene, const FrameSpec& frame,
                                 ScanOrder order, double cell_u, double margin_u);

// Applies moves, recomputes group boxes and re-emits. Stage becomes laid_out.
SceneProgram apply_layout(const SceneProgram& scene, const PlacementPlan& plan, const codegen::DialectSpec& dialect);

struct EditResult {
    SceneProgram scene;
    ConflictReport report;
};

// Applies educator edits verbatim and reports the resulting conflicts.
// Stage becomes final.
EditResult apply_human_edits(const SceneProgram& scene, const EditSet& edits, const FrameSpec& frame,
                             double margin_u, const codegen::DialectSpec& dialect);

// Group boxes become the union of their children, innermost first.
void recompute_groups(SceneProgram& scene);

}  // namespace lectern::layout
