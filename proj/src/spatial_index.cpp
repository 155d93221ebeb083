#include "mndt/spatial_index.hpp"

#include <algorithm>

namespace mndt {

PolygonIndex::PolygonIndex(const Rect& extent, std::span<const Polygon* const> polygons,
                           double cell_size_m)
    : extent_(extent), cell_(cell_size_m), polygons_(polygons.begin(), polygons.end()) {
    nx_ = std::max(1, int(std::ceil(extent.width() / cell_)));
    ny_ = std::max(1, int(std::ceil(extent.height() / cell_)));
    boxes_.reserve(polygons_.size());
    for (const auto* p : polygons_) boxes_.push_back(bounding_box(*p));

    auto cell_range = [&](const Rect& r, int& x0, int& x1, int& y0, int& y1) {
        x0 = std::clamp(int(std::floor((r.min.x - extent_.min.x) / cell_)), 0, nx_ - 1);
        x1 = std::clamp(int(std::floor((r.max.x - extent_.min.x) / cell_)), 0, nx_ - 1);
        y0 = std::clamp(int(std::floor((r.min.y - extent_.min.y) / cell_)), 0, ny_ - 1);
        y1 = std::clamp(int(std::floor((r.max.y - extent_.min.y) / cell_)), 0, ny_ - 1);
    };
    std::vector<std::size_t> counts(std::size_t(nx_) * std::size_t(ny_) + 1, 0);
    for (const auto& r : boxes_) {
        int x0, x1, y0, y1;
        cell_range(r, x0, x1, y0, y1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) ++counts[std::size_t(y) * std::size_t(nx_) + std::size_t(x) + 1];
    }
    for (std::size_t k = 1; k < counts.size(); ++k) counts[k] += counts[k - 1];
    offsets_ = counts;
    ids_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t id = 0; id < boxes_.size(); ++id) {
        int x0, x1, y0, y1;
        cell_range(boxes_[id], x0, x1, y0, y1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                ids_[fill[std::size_t(y) * std::size_t(nx_) + std::size_t(x)]++] = std::uint32_t(id);
    }
}

int PolygonIndex::find_containing(Vec2 p) const {
    if (nx_ == 0 || !extent_.contains(p, cell_)) return -1;
    const int cx = std::clamp(int(std::floor((p.x - extent_.min.x) / cell_)), 0, nx_ - 1);
    const int cy = std::clamp(int(std::floor((p.y - extent_.min.y) / cell_)), 0, ny_ - 1);
    for (auto id : cell(cx, cy)) {
        if (boxes_[id].contains(p) && point_in_polygon(p, *polygons_[id])) return int(id);
    }
    return -1;
}

} // namespace mndt
