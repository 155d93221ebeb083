#include "mndt/geometry.hpp"

#include <algorithm>
#include <limits>

namespace mndt {

Rect bounding_box(std::span<const Vec2> poly) {
    Rect r{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
    for (const auto& p : poly) {
        r.min.x = std::min(r.min.x, p.x);
        r.min.y = std::min(r.min.y, p.y);
        r.max.x = std::max(r.max.x, p.x);
        r.max.y = std::max(r.max.y, p.y);
    }
    return r;
}

double signed_area(std::span<const Vec2> poly) {
    double a = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        a += cross(poly[i], poly[(i + 1) % n]);
    }
    return 0.5 * a;
}

Vec2 centroid(std::span<const Vec2> poly) {
    const double a = signed_area(poly);
    if (std::abs(a) < 1e-12) {
        Vec2 c;
        for (const auto& p : poly) c += p;
        return poly.empty() ? c : c * (1.0 / double(poly.size()));
    }
    Vec2 c;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const double w = cross(p, q);
        c += (p + q) * w;
    }
    return c * (1.0 / (6.0 * a));
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
    bool inside = false;
    for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    constexpr double eps = 1e-12;
    if (v > eps) return 1;
    if (v < -eps) return -1;
    return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

} // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

std::optional<double> segment_crossing(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const Vec2 r = b - a;
    const Vec2 s = d - c;
    const double denom = cross(r, s);
    if (std::abs(denom) < 1e-15) return std::nullopt;
    const Vec2 ac = c - a;
    const double t = cross(ac, s) / denom;
    const double u = cross(ac, r) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

bool is_simple(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (distance(poly[i], poly[(i + 1) % n]) < 1e-9) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // adjacent edges share a vertex by construction
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
        }
    }
    return std::abs(signed_area(poly)) > 1e-12;
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + ab * t;
}

Vec2 closest_point_on_boundary(Vec2 p, std::span<const Vec2> poly) {
    Vec2 best = poly.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const Vec2 q = closest_point_on_segment(p, poly[i], poly[(i + 1) % n]);
        const double d = distance(p, q);
        if (d < best_d) {
            best_d = d;
            best = q;
        }
    }
    return best;
}

double distance_to_boundary(Vec2 p, std::span<const Vec2> poly) {
    return distance(p, closest_point_on_boundary(p, poly));
}

bool polygon_contains_polygon(std::span<const Vec2> outer, std::span<const Vec2> inner) {
    for (const auto& v : inner) {
        if (!point_in_polygon(v, outer)) return false;
    }
    for (std::size_t i = 0, n = inner.size(); i < n; ++i) {
        for (std::size_t j = 0, m = outer.size(); j < m; ++j) {
            if (segments_intersect(inner[i], inner[(i + 1) % n], outer[j], outer[(j + 1) % m]))
                return false;
        }
    }
    return true;
}

Vec2 project_inside(Vec2 p, std::span<const Vec2> poly, double inset) {
    if (point_in_polygon(p, poly)) return p;
    const Vec2 q = closest_point_on_boundary(p, poly);
    const Vec2 c = centroid(poly);
    Vec2 candidate = q + unit(c - q) * inset;
    if (point_in_polygon(candidate, poly)) return candidate;
    // non-convex corner: walk towards the centroid until inside
    for (double f = 0.01; f <= 1.0; f *= 2.0) {
        candidate = q + (c - q) * f;
        if (point_in_polygon(candidate, poly)) return candidate;
    }
    return c;
}

Polygon rectangle_polygon(const Rect& r) {
    return {r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}};
}

} // namespace mndt
