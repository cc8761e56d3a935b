#pragma once

// Grid-level verification of the Skorokhod problem on an interval and of the
// extended Skorokhod problem on the whole horizon, for sampled (Z, Y, X).

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "wedge_rbm/decomposition.hpp"
#include "wedge_rbm/errors.hpp"
#include "wedge_rbm/geometry.hpp"

namespace wedge_rbm {

struct ToleranceProfile {
    double additivity = 1e-9;
    double containment = 1e-9;
    double monotonicity = 1e-9;
    double offboundary_fraction = 0.05;
    double direction_deg = 2.0;
    double hull = 1e-9;
    double spike = 1.0;  // |dY| per step above this counts as a jump
};

struct SPReport {
    std::size_t start = 0;
    std::size_t end = 0;  // last increment checked is (end-1, end]
    bool end_vertex_excluded = false;
    double additivity_residual = 0.0;
    double containment_violation = 0.0;
    double total_variation = 0.0;
    double offboundary_increase = 0.0;
    double direction_residual_deg = 0.0;
    double monotonicity_residual = 0.0;      // largest decrease of u_1 or u_2
    double pushing_variation = 0.0;          // |v1| du1 + |v2| du2
    double variation_identity_residual = 0.0;  // relative gap to total_variation
    bool pass = false;
};

namespace detail {

inline double additivity(std::span<const Vec2> z, std::span<const Vec2> y, std::span<const Vec2> x, std::size_t a,
                         std::size_t b) {
    double r = 0.0;
    for (std::size_t k = a; k <= b; ++k) r = std::max(r, norm(z[k] - x[k] - y[k]));
    return r;
}

inline double angle_between_deg(const Vec2& a, const Vec2& b) {
    const double c = std::atan2(std::abs(cross(a, b)), dot(a, b));
    return c * 180.0 / kPi;
}

}  // namespace detail

/// SP conditions on the grid interval [start, end]. A vertex visit strictly
/// inside the interval is a precondition failure; one at `end` drops the last
/// increment and is reported through end_vertex_excluded.
inline SPReport check_sp(std::span<const Vec2> z, std::span<const Vec2> y, std::span<const Vec2> x,
                         const WedgeConfig& cfg, std::size_t start, std::size_t end, double band,
                         const ToleranceProfile& tol = {}) {
    if (z.size() != y.size() || z.size() != x.size()) throw DomainError("path", "Z, Y and X differ in length");
    if (start >= end || end >= z.size()) throw DomainError("interval", "must satisfy start < end < size");
    if (band < 0.0) throw DomainError("band", "must be >= 0");
    for (std::size_t k = start + 1; k < end; ++k)
        if (norm(z[k]) <= band) throw PreconditionError("interval crosses a vertex visit at index " + std::to_string(k));

    SPReport r;
    r.start = start;
    r.end = end;
    if (norm(z[end]) <= band) {
        r.end_vertex_excluded = true;
        r.end = end - 1;
    }
    r.additivity_residual = detail::additivity(z, y, x, start, end);
    for (std::size_t k = start; k <= end; ++k)
        r.containment_violation = std::max(r.containment_violation, distance_to_wedge(z[k], cfg));

    for (std::size_t k = r.start + 1; k <= r.end; ++k) {
        const Vec2 dy = y[k] - y[k - 1];
        const double m = norm(dy);
        // Rounding in Z - X leaves sub-tolerance residue on steps without a push.
        if (m <= tol.additivity) continue;
        r.total_variation += m;
        const bool on1 = distance_to_edge1(z[k], cfg) <= band;
        const bool on2 = distance_to_edge2(z[k], cfg) <= band;
        if (!on1 && !on2) {
            r.offboundary_increase += m;
            continue;
        }
        double a = std::numeric_limits<double>::infinity();
        if (on1) a = std::min(a, detail::angle_between_deg(dy, cfg.v1));
        if (on2) a = std::min(a, detail::angle_between_deg(dy, cfg.v2));
        r.direction_residual_deg = std::max(r.direction_residual_deg, a);
    }

    if (r.end > r.start) {
        const PushComponents pc = pushing_components(z, y, r.start, r.end, cfg, band, tol.additivity);
        r.monotonicity_residual = std::max(pc.negative_increment[0], pc.negative_increment[1]);
        const Vec2 du = pc.u.back() - pc.u.front();
        r.pushing_variation = norm(cfg.v1) * du.x + norm(cfg.v2) * du.y;
    }
    r.variation_identity_residual =
        r.total_variation > 0.0 ? std::abs(r.total_variation - r.pushing_variation) / r.total_variation
                                : std::abs(r.pushing_variation);

    r.pass = r.additivity_residual <= tol.additivity && r.containment_violation <= tol.containment &&
             r.monotonicity_residual <= tol.monotonicity &&
             r.offboundary_increase <= tol.offboundary_fraction * r.total_variation + tol.additivity &&
             r.direction_residual_deg <= tol.direction_deg;
    return r;
}

struct ESPReport {
    bool structural_failure = false;  // hull of V, v1, v2 is not the plane
    double additivity_residual = 0.0;
    double containment_violation = 0.0;
    std::size_t pairs_checked = 0;
    std::size_t vacuous_pairs = 0;  // hull is the plane
    std::size_t hull_violations = 0;
    double worst_hull_distance = 0.0;
    std::size_t spikes = 0;
    // Consecutive pairs ending in a vertex visit whose increment lies outside V
    // alone; informational, see check_esp.
    std::size_t literal_vertex_violations = 0;
    std::size_t vertex_visits = 0;
    std::size_t edge1_visits = 0;
    std::size_t edge2_visits = 0;
    bool pass = false;
};

/// Pairs tested: all pairs among at most `max_anchors` evenly spaced grid
/// indices, plus every consecutive pair. A point within `band` of an edge
/// contributes that edge's ray. A point within `band` of the vertex contributes
/// V and both edge rays: a continuous path reaching the vertex touches both
/// edges in every neighbourhood of that time, which a grid cannot resolve.
/// Pairs that would fail with V alone are counted in literal_vertex_violations.
inline ESPReport check_esp(std::span<const Vec2> z, std::span<const Vec2> y, std::span<const Vec2> x,
                           const WedgeConfig& cfg, const VertexCone& vertex_cone, double band,
                           const ToleranceProfile& tol = {}, std::size_t max_anchors = 500) {
    if (z.size() != y.size() || z.size() != x.size()) throw DomainError("path", "Z, Y and X differ in length");
    if (z.size() < 2) throw DomainError("path", "need at least 2 samples");
    if (band < 0.0) throw DomainError("band", "must be >= 0");
    if (max_anchors < 2) throw DomainError("max_anchors", "must be >= 2");
    vertex_cone.validate(cfg);

    const std::size_t n = z.size();
    ESPReport r;
    r.structural_failure = !hull_is_full(vertex_cone, cfg);
    r.additivity_residual = detail::additivity(z, y, x, 0, n - 1);

    // Prefix visit counts: c[k] = visits among indices 1..k.
    std::vector<std::size_t> cv(n, 0), c1(n, 0), c2(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        r.containment_violation = std::max(r.containment_violation, distance_to_wedge(z[k], cfg));
        bool v = false, e1 = false, e2 = false;
        if (k > 0) {
            if (norm(z[k]) <= band) {
                v = true;
            } else {
                e1 = distance_to_edge1(z[k], cfg) <= band;
                e2 = distance_to_edge2(z[k], cfg) <= band;
            }
            if (norm(y[k] - y[k - 1]) > tol.spike) ++r.spikes;
        }
        cv[k] = (k ? cv[k - 1] : 0) + (v ? 1 : 0);
        c1[k] = (k ? c1[k - 1] : 0) + (e1 ? 1 : 0);
        c2[k] = (k ? c2[k - 1] : 0) + (e2 ? 1 : 0);
    }
    r.vertex_visits = cv.back();
    r.edge1_visits = c1.back();
    r.edge2_visits = c2.back();

    auto check_pair = [&](std::size_t s, std::size_t t) {
        ++r.pairs_checked;
        ConeDescriptor hull;
        const bool vertex = cv[t] > cv[s];
        if (vertex) append_vertex_cone(hull, vertex_cone);
        if (c1[t] > c1[s] || vertex) hull.rays.push_back(cfg.v1);
        if (c2[t] > c2[s] || vertex) hull.rays.push_back(cfg.v2);
        if (vertex && t == s + 1) {
            ConeDescriptor literal;
            append_vertex_cone(literal, vertex_cone);
            if (!positively_spans_plane(literal) && distance_to_cone(y[t] - y[s], literal) > tol.hull)
                ++r.literal_vertex_violations;
        }
        if (positively_spans_plane(hull)) {
            ++r.vacuous_pairs;
            return;
        }
        const double d = distance_to_cone(y[t] - y[s], hull);
        r.worst_hull_distance = std::max(r.worst_hull_distance, d);
        if (d > tol.hull) ++r.hull_violations;
    };

    const std::size_t m = std::min(max_anchors, n);
    std::vector<std::size_t> anchors(m);
    for (std::size_t i = 0; i < m; ++i) anchors[i] = (i * (n - 1)) / (m - 1);
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    for (std::size_t i = 0; i < anchors.size(); ++i)
        for (std::size_t j = i + 1; j < anchors.size(); ++j) check_pair(anchors[i], anchors[j]);
    std::vector<char> anchored_step(n, 0);  // (k-1, k) already an anchor pair
    for (std::size_t i = 1; i < anchors.size(); ++i)
        if (anchors[i] == anchors[i - 1] + 1) anchored_step[anchors[i]] = 1;
    for (std::size_t k = 1; k < n; ++k)
        if (!anchored_step[k]) check_pair(k - 1, k);

    r.pass = !r.structural_failure && r.hull_violations == 0 && r.spikes == 0 &&
             r.additivity_residual <= tol.additivity && r.containment_violation <= tol.containment;
    return r;
}

// ---------------------------------------------------------------------------
// JSONL records

inline void write_sp_jsonl(std::ostream& os, std::size_t path_id, std::size_t excursion, const SPReport& r) {
    os << std::setprecision(17) << "{\"path_id\":" << path_id << ",\"excursion\":" << excursion
       << ",\"start\":" << r.start << ",\"end\":" << r.end
       << ",\"end_vertex_excluded\":" << (r.end_vertex_excluded ? "true" : "false")
       << ",\"additivity_residual\":" << r.additivity_residual
       << ",\"containment_violation\":" << r.containment_violation << ",\"total_variation\":" << r.total_variation
       << ",\"offboundary_increase\":" << r.offboundary_increase
       << ",\"direction_residual_deg\":" << r.direction_residual_deg
       << ",\"monotonicity_residual\":" << r.monotonicity_residual << ",\"pushing_variation\":" << r.pushing_variation
       << ",\"variation_identity_residual\":" << r.variation_identity_residual
       << ",\"pass\":" << (r.pass ? "true" : "false") << "}\n";
}

inline void write_esp_jsonl(std::ostream& os, std::size_t path_id, const ESPReport& r) {
    os << std::setprecision(17) << "{\"path_id\":" << path_id
       << ",\"structural_failure\":" << (r.structural_failure ? "true" : "false")
       << ",\"additivity_residual\":" << r.additivity_residual
       << ",\"containment_violation\":" << r.containment_violation << ",\"pairs_checked\":" << r.pairs_checked
       << ",\"vacuous_pairs\":" << r.vacuous_pairs << ",\"hull_violations\":" << r.hull_violations
       << ",\"worst_hull_distance\":" << r.worst_hull_distance << ",\"spikes\":" << r.spikes
       << ",\"literal_vertex_violations\":" << r.literal_vertex_violations
       << ",\"vertex_visits\":" << r.vertex_visits << ",\"edge1_visits\":" << r.edge1_visits
       << ",\"edge2_visits\":" << r.edge2_visits << ",\"pass\":" << (r.pass ? "true" : "false") << "}\n";
}

}  // namespace wedge_rbm
