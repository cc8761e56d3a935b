#pragma once

// Planar wedge S = {(r, theta): r >= 0, 0 <= theta <= xi} with oblique
// reflection directions on its two edges and a configurable cone at the
// vertex. Edge 1 is the positive x-axis, edge 2 the ray at angle xi.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wedge_rbm/errors.hpp"

namespace wedge_rbm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) noexcept { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) noexcept { return std::sqrt(dot(a, a)); }
inline Vec2 unit_at(double angle) noexcept { return {std::cos(angle), std::sin(angle)}; }

/// Polar angle in [0, 2*pi).
inline double polar_angle(const Vec2& a) noexcept {
    double t = std::atan2(a.y, a.x);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t -= kTwoPi;
    return t;
}

/// Column-major 2x2 matrix.
struct Mat2 {
    Vec2 col0;
    Vec2 col1;

    double det() const noexcept { return col0.x * col1.y - col1.x * col0.y; }
    Vec2 operator*(const Vec2& v) const noexcept { return v.x * col0 + v.y * col1; }

    Mat2 inverse() const {
        const double d = det();
        if (d == 0.0 || !std::isfinite(d)) throw ConfigurationError("reflection matrix R is singular");
        return {Vec2{col1.y / d, -col0.y / d}, Vec2{-col1.x / d, col0.x / d}};
    }
};

/// Geometry of the wedge plus its reflection field. Immutable once built.
struct WedgeConfig {
    double xi = kPi / 2;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double alpha = 0.0;
    Vec2 v1;   // reflection direction on edge 1, v1.n1 = 1
    Vec2 v2;   // reflection direction on edge 2, v2.n2 = 1
    Vec2 n1;   // inward unit normal of edge 1
    Vec2 n2;   // inward unit normal of edge 2
    Mat2 R;    // columns v1, v2

    Vec2 edge1() const noexcept { return {1.0, 0.0}; }
    Vec2 edge2() const noexcept { return unit_at(xi); }
    Vec2 bisector() const noexcept { return unit_at(xi / 2); }
    bool alpha_in_target_range() const noexcept { return alpha > 1.0 && alpha < 2.0; }
};

inline WedgeConfig make_wedge(double xi, double theta1, double theta2) {
    if (!(xi > 0.0 && xi < kTwoPi)) throw DomainError("xi", "must lie in (0, 2*pi)");
    if (!(std::abs(theta1) < kPi / 2)) throw DomainError("theta1", "must lie in (-pi/2, pi/2)");
    if (!(std::abs(theta2) < kPi / 2)) throw DomainError("theta2", "must lie in (-pi/2, pi/2)");

    WedgeConfig c;
    c.xi = xi;
    c.theta1 = theta1;
    c.theta2 = theta2;
    c.alpha = (theta1 + theta2) / xi;
    c.n1 = {0.0, 1.0};
    c.n2 = {std::sin(xi), -std::cos(xi)};
    // Angles directed toward the origin are positive.
    c.v1 = {-std::tan(theta1), 1.0};
    c.v2 = {std::sin(xi) - std::tan(theta2) * std::cos(xi), -std::cos(xi) - std::tan(theta2) * std::sin(xi)};
    c.R = {c.v1, c.v2};
    return c;
}

// ---------------------------------------------------------------------------
// Membership

namespace detail {
inline double membership_slack(const Vec2& q) noexcept { return 1e-12 * std::max(1.0, norm(q)); }

/// Distance from q to the closed ray {s*dir : s >= 0}, dir a unit vector.
inline double distance_to_ray(const Vec2& q, const Vec2& dir) noexcept {
    const double s = dot(q, dir);
    if (s <= 0.0) return norm(q);
    return std::abs(cross(dir, q));
}
}  // namespace detail

/// Signed-margin membership of q in the wedge with vertex at the origin.
inline bool in_wedge(const Vec2& q, const WedgeConfig& cfg, double slack) noexcept {
    const double a = dot(cfg.n1, q);
    const double b = dot(cfg.n2, q);
    if (cfg.xi <= kPi) return a >= -slack && b >= -slack;
    return a >= -slack || b >= -slack;
}

/// True iff point lies in S_delta = S + delta * e^{i xi/2}.
inline bool contains(const Vec2& point, const WedgeConfig& cfg, double delta = 0.0) {
    if (delta < 0.0) throw DomainError("delta", "must be >= 0");
    const Vec2 q = point - delta * cfg.bisector();
    return in_wedge(q, cfg, detail::membership_slack(q));
}

/// True iff point lies in the interior of S_delta (strict margins).
inline bool contains_interior(const Vec2& point, const WedgeConfig& cfg, double delta) {
    const Vec2 q = point - delta * cfg.bisector();
    const double a = dot(cfg.n1, q);
    const double b = dot(cfg.n2, q);
    if (cfg.xi <= kPi) return a > 0.0 && b > 0.0;
    return a > 0.0 || b > 0.0;
}

inline double distance_to_edge1(const Vec2& z, const WedgeConfig& cfg) noexcept {
    return detail::distance_to_ray(z, cfg.edge1());
}
inline double distance_to_edge2(const Vec2& z, const WedgeConfig& cfg) noexcept {
    return detail::distance_to_ray(z, cfg.edge2());
}

/// Euclidean distance from z to S (0 inside).
inline double distance_to_wedge(const Vec2& z, const WedgeConfig& cfg) noexcept {
    if (in_wedge(z, cfg, 0.0)) return 0.0;
    return std::min(distance_to_edge1(z, cfg), distance_to_edge2(z, cfg));
}

// ---------------------------------------------------------------------------
// Cones

/// The cone V = d(0) at the vertex.
struct VertexCone {
    enum class Kind { zero, ray, full_plane };
    Kind kind = Kind::ray;
    double direction = 0.0;  // radians, meaningful for Kind::ray

    static VertexCone zero() { return {Kind::zero, 0.0}; }
    static VertexCone full_plane() { return {Kind::full_plane, 0.0}; }
    static VertexCone ray(double angle) { return {Kind::ray, angle}; }
    static VertexCone bisector(const WedgeConfig& cfg) { return {Kind::ray, cfg.xi / 2}; }

    void validate(const WedgeConfig& cfg) const {
        if (kind == Kind::ray && !(direction >= 0.0 && direction <= cfg.xi))
            throw DomainError("vertex_cone", "ray direction must lie in [0, xi]");
    }
};

/// Closed convex cone generated by a finite set of rays, or the whole plane.
struct ConeDescriptor {
    bool full = false;
    std::vector<Vec2> rays;

    bool is_zero() const noexcept { return !full && rays.empty(); }
};

inline void append_vertex_cone(ConeDescriptor& c, const VertexCone& v) {
    switch (v.kind) {
        case VertexCone::Kind::zero: break;
        case VertexCone::Kind::ray: c.rays.push_back(unit_at(v.direction)); break;
        case VertexCone::Kind::full_plane: c.full = true; break;
    }
}

/// d(z) for a sampled point, with edges and vertex classified within `band`.
inline ConeDescriptor cone_at(const Vec2& z, const WedgeConfig& cfg, const VertexCone& vertex_cone, double band) {
    if (band < 0.0) throw DomainError("band", "must be >= 0");
    if (distance_to_wedge(z, cfg) > band + detail::membership_slack(z))
        throw DomainError("z", "point lies outside the wedge beyond the band");
    ConeDescriptor c;
    if (norm(z) <= band) {
        append_vertex_cone(c, vertex_cone);
        return c;
    }
    if (distance_to_edge1(z, cfg) <= band) c.rays.push_back(cfg.v1);
    if (distance_to_edge2(z, cfg) <= band) c.rays.push_back(cfg.v2);
    return c;
}

namespace detail {

/// Sector description of a cone: either the full plane, the zero cone, a
/// line, or the ccw sector [start, start + width] with width <= pi.
struct Sector {
    enum class Shape { zero, full, line, sector };
    Shape shape = Shape::zero;
    double start = 0.0;
    double width = 0.0;
};

inline constexpr double kAngleTol = 1e-12;

inline Sector sector_of(const ConeDescriptor& c) {
    if (c.full) return {Sector::Shape::full};
    std::vector<double> angles;
    for (const Vec2& r : c.rays) {
        if (r.x == 0.0 && r.y == 0.0) continue;
        angles.push_back(polar_angle(r));
    }
    if (angles.empty()) return {Sector::Shape::zero};
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(),
                             [](double a, double b) { return std::abs(a - b) <= kAngleTol; }),
                 angles.end());
    if (angles.size() == 1) return {Sector::Shape::sector, angles[0], 0.0};
    // Largest ccw gap between consecutive generators.
    double max_gap = -1.0;
    std::size_t after = 0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double next = (i + 1 < angles.size()) ? angles[i + 1] : angles[0] + kTwoPi;
        const double gap = next - angles[i];
        if (gap > max_gap) {
            max_gap = gap;
            after = (i + 1) % angles.size();
        }
    }
    if (max_gap < kPi - kAngleTol) return {Sector::Shape::full};
    const double width = kTwoPi - max_gap;
    if (angles.size() == 2 && std::abs(max_gap - kPi) <= kAngleTol) return {Sector::Shape::line, angles[after], width};
    return {Sector::Shape::sector, angles[after], width};
}

}  // namespace detail

/// True iff the closed convex cone generated by the descriptor is R^2.
inline bool positively_spans_plane(const ConeDescriptor& c) {
    return detail::sector_of(c).shape == detail::Sector::Shape::full;
}

/// Euclidean distance from w to the closed convex cone described by c.
inline double distance_to_cone(const Vec2& w, const ConeDescriptor& c) {
    using detail::Sector;
    const Sector s = detail::sector_of(c);
    switch (s.shape) {
        case Sector::Shape::full: return 0.0;
        case Sector::Shape::zero: return norm(w);
        case Sector::Shape::line: {
            const Vec2 d = unit_at(s.start);
            return std::abs(cross(d, w));
        }
        case Sector::Shape::sector: break;
    }
    if (w.x == 0.0 && w.y == 0.0) return 0.0;
    double rel = polar_angle(w) - s.start;
    if (rel < 0.0) rel += kTwoPi;
    if (rel <= s.width + detail::kAngleTol) return 0.0;
    return std::min(detail::distance_to_ray(w, unit_at(s.start)),
                    detail::distance_to_ray(w, unit_at(s.start + s.width)));
}

/// Whether the closed convex hull of V, ray(v1) and ray(v2) is the plane.
inline bool hull_is_full(const VertexCone& vertex_cone, const WedgeConfig& cfg) {
    ConeDescriptor c;
    c.rays = {cfg.v1, cfg.v2};
    append_vertex_cone(c, vertex_cone);
    return positively_spans_plane(c);
}

/// Angle swept counterclockwise from v2 to v1; this sweep passes through S.
inline double reflection_opening_angle(const WedgeConfig& cfg) noexcept {
    double a = polar_angle(cfg.v1) - polar_angle(cfg.v2);
    if (a < 0.0) a += kTwoPi;
    return a;
}

inline std::string to_string(const VertexCone& v) {
    switch (v.kind) {
        case VertexCone::Kind::zero: return "zero";
        case VertexCone::Kind::full_plane: return "full";
        case VertexCone::Kind::ray: return "ray:" + std::to_string(v.direction);
    }
    return "?";
}

}  // namespace wedge_rbm
