#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace mndt {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Unit vector along `a`; the zero vector maps to zero.
inline Vec2 unit(Vec2 a) {
    const double n = norm(a);
    return n > 0.0 ? a * (1.0 / n) : Vec2{};
}

/// Axis-aligned rectangle [min, max].
struct Rect {
    Vec2 min;
    Vec2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double area() const { return width() * height(); }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol &&
               p.y <= max.y + tol;
    }
    constexpr bool operator==(const Rect&) const = default;
};

/// Closed polygon given by its vertices in order; the closing edge is implicit.
using Polygon = std::vector<Vec2>;

Rect bounding_box(std::span<const Vec2> poly);
double signed_area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);

/// Even-odd rule. Points exactly on the boundary may land on either side.
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

/// True iff no two non-adjacent edges intersect and no edge is degenerate.
bool is_simple(std::span<const Vec2> poly);

/// Proper or touching intersection of closed segments [a,b] and [c,d].
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Parameter t in [0,1] along [a,b] where it crosses [c,d], if it does.
std::optional<double> segment_crossing(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);
Vec2 closest_point_on_boundary(Vec2 p, std::span<const Vec2> poly);
double distance_to_boundary(Vec2 p, std::span<const Vec2> poly);

/// `inner` lies strictly inside `outer`: every vertex inside and no edge crossings.
bool polygon_contains_polygon(std::span<const Vec2> outer, std::span<const Vec2> inner);

/// Closest point to `p` that is inside `poly`, nudged `inset` meters towards the centroid.
Vec2 project_inside(Vec2 p, std::span<const Vec2> poly, double inset = 1e-3);

Polygon rectangle_polygon(const Rect& r);

} // namespace mndt
