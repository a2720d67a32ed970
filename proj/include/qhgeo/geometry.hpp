#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace qhgeo {

using Vec2 = Eigen::Vector2d;

/// Closed segment between two planar points.
struct Segment {
    Vec2 a;
    Vec2 b;

    double length() const { return (b - a).norm(); }
    Vec2 direction() const { return (b - a).normalized(); }
    Vec2 point_at(double t) const { return a + t * (b - a); }
};

inline double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

/// Distance from p to the closed segment [a,b].
inline double point_segment_distance(const Vec2& p, const Segment& s) {
    const Vec2 ab = s.b - s.a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - s.a).norm();
    const double t = std::clamp((p - s.a).dot(ab) / len2, 0.0, 1.0);
    return (p - (s.a + t * ab)).norm();
}

/// True iff p lies exactly on the closed segment [a,b].
inline bool point_on_segment(const Vec2& p, const Segment& s) {
    const Vec2 ab = s.b - s.a;
    const Vec2 ap = p - s.a;
    if (cross2(ab, ap) != 0.0) return false;
    const double d = ap.dot(ab);
    return d >= 0.0 && d <= ab.squaredNorm();
}

namespace detail {
inline int orientation_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = cross2(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}
}  // namespace detail

/// True iff the closed segments touch or cross anywhere (shared endpoints count).
inline bool segments_intersect(const Segment& s1, const Segment& s2) {
    using detail::orientation_sign;
    const int o1 = orientation_sign(s1.a, s1.b, s2.a);
    const int o2 = orientation_sign(s1.a, s1.b, s2.b);
    const int o3 = orientation_sign(s2.a, s2.b, s1.a);
    const int o4 = orientation_sign(s2.a, s2.b, s1.b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && point_on_segment(s2.a, s1)) return true;
    if (o2 == 0 && point_on_segment(s2.b, s1)) return true;
    if (o3 == 0 && point_on_segment(s1.a, s2)) return true;
    if (o4 == 0 && point_on_segment(s1.b, s2)) return true;
    return false;
}

/// Minimum distance between two closed segments (0 when they intersect).
inline double segment_segment_distance(const Segment& s1, const Segment& s2) {
    if (segments_intersect(s1, s2)) return 0.0;
    return std::min(std::min(point_segment_distance(s1.a, s2), point_segment_distance(s1.b, s2)),
                    std::min(point_segment_distance(s2.a, s1), point_segment_distance(s2.b, s1)));
}

/// Strict point-in-polygon test (crossing number); boundary points count as outside.
inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (point_on_segment(p, Segment{poly[i], poly[(i + 1) % n]})) return false;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x_cross) inside = !inside;
        }
    }
    return inside;
}

inline double polygon_perimeter(const std::vector<Vec2>& poly) {
    double total = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        total += (poly[(i + 1) % poly.size()] - poly[i]).norm();
    }
    return total;
}

}  // namespace qhgeo
