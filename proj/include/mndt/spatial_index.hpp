#pragma once

#include "mndt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace mndt {

/// Uniform bucket grid over polygon bounding boxes.
class PolygonIndex {
  public:
    PolygonIndex() = default;
    PolygonIndex(const Rect& extent, std::span<const Polygon* const> polygons, double cell_size_m);

    /// Index of a polygon containing p, or -1.
    int find_containing(Vec2 p) const;

    /// Calls visit(id) for every polygon whose box overlaps a cell crossed by
    /// segment [a,b], in traversal order; stops early when visit returns true.
    /// A polygon may be reported more than once.
    template <typename Visit>
    bool walk_segment(Vec2 a, Vec2 b, Visit&& visit) const;

    const Polygon& polygon(std::size_t id) const { return *polygons_[id]; }
    const Rect& box(std::size_t id) const { return boxes_[id]; }
    std::size_t size() const { return polygons_.size(); }

  private:
    std::span<const std::uint32_t> cell(int cx, int cy) const {
        const auto k = std::size_t(cy) * std::size_t(nx_) + std::size_t(cx);
        return {ids_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
    }

    Rect extent_;
    double cell_ = 1.0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<const Polygon*> polygons_;
    std::vector<Rect> boxes_;
    std::vector<std::size_t> offsets_; // CSR layout, nx*ny + 1 entries
    std::vector<std::uint32_t> ids_;
};

template <typename Visit>
bool PolygonIndex::walk_segment(Vec2 a, Vec2 b, Visit&& visit) const {
    if (nx_ == 0) return false;
    auto to_cell = [&](double v, double lo, int n) {
        return std::clamp(int(std::floor((v - lo) / cell_)), 0, n - 1);
    };
    int cx = to_cell(a.x, extent_.min.x, nx_);
    int cy = to_cell(a.y, extent_.min.y, ny_);
    const int ex = to_cell(b.x, extent_.min.x, nx_);
    const int ey = to_cell(b.y, extent_.min.y, ny_);
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    constexpr double inf = 1e300;
    const double t_delta_x = step_x != 0 ? cell_ / std::abs(dx) : inf;
    const double t_delta_y = step_y != 0 ? cell_ / std::abs(dy) : inf;
    auto boundary = [&](int c, int step, double lo) { return lo + (c + (step > 0 ? 1 : 0)) * cell_; };
    double t_max_x = step_x != 0 ? (boundary(cx, step_x, extent_.min.x) - a.x) / dx : inf;
    double t_max_y = step_y != 0 ? (boundary(cy, step_y, extent_.min.y) - a.y) / dy : inf;

    for (int guard = nx_ + ny_ + 2; guard > 0; --guard) {
        for (auto id : cell(cx, cy)) {
            if (visit(std::size_t(id))) return true;
        }
        if (cx == ex && cy == ey) break;
        if (t_max_x < t_max_y) {
            if (t_max_x > 1.0) break;
            cx += step_x;
            t_max_x += t_delta_x;
        } else {
            if (t_max_y > 1.0) break;
            cy += step_y;
            t_max_y += t_delta_y;
        }
        if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) break;
    }
    return false;
}

} // namespace mndt
