#pragma once

// Euler scheme for obliquely reflected Brownian motion in the wedge.
//
// Each step proposes z + dX. A proposal outside S that violates a single edge
// is pushed back along that edge's reflection direction by the minimal
// amount. When the push would overshoot the vertex, or both edges are
// violated, the state is set to the origin and the step is flagged as a
// vertex hit. Gaussian increments come from a Philox stream keyed by
// (seed, path index) and addressed by step index, transformed through the
// inverse normal CDF.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "wedge_rbm/geometry.hpp"
#include "wedge_rbm/parallel.hpp"
#include "wedge_rbm/random.hpp"

namespace wedge_rbm {

struct SimParams {
    Vec2 z0;
    double dt = 1e-4;
    double t_end = 1.0;
    std::uint64_t seed = 1;
    VertexCone vertex_cone;

    void validate(const WedgeConfig& cfg) const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt", "must be positive and finite");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end", "must be positive and finite");
        if (!(dt < t_end)) throw DomainError("dt", "must be smaller than t_end");
        if (!std::isfinite(z0.x) || !std::isfinite(z0.y) || !contains(z0, cfg))
            throw DomainError("z0", "must lie in the wedge");
    }
};

/// Reflection applied during one step: a1*v1 + a2*v2, or a jump to the origin.
struct PushRecord {
    double a1 = 0.0;
    double a2 = 0.0;
    bool vertex_hit = false;

    friend bool operator==(const PushRecord&, const PushRecord&) = default;
};

struct PathBundle {
    std::vector<double> times;
    std::vector<Vec2> z;              // reflected path
    std::vector<Vec2> x;              // z0 + cumulative driving noise
    std::vector<PushRecord> pushes;   // pushes[k] describes the step (k-1, k]; pushes[0] is empty
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return times.size(); }
    double t_end() const noexcept { return times.empty() ? 0.0 : times.back(); }

    /// Y = Z - X on the grid.
    std::vector<Vec2> y() const {
        std::vector<Vec2> out(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] - x[k];
        return out;
    }

    friend bool operator==(const PathBundle& a, const PathBundle& b) {
        return a.times == b.times && a.z == b.z && a.x == b.x && a.pushes == b.pushes;
    }
};

struct ReflectResult {
    Vec2 point;
    double a1 = 0.0;
    double a2 = 0.0;
    bool vertex_hit = false;
};

namespace detail {

/// Index (1 or 2) of the edge a proposal outside S is pushed toward, or 0
/// when both edges are violated.
inline int violated_edge(const Vec2& p, const WedgeConfig& cfg) {
    const double c1 = dot(cfg.n1, p);
    const double c2 = dot(cfg.n2, p);
    if (cfg.xi <= kPi) {
        if (c1 < 0.0 && c2 < 0.0) return 0;
        return c1 < 0.0 ? 1 : 2;
    }
    // Reflex wedge: the excluded region is the open sector (xi, 2*pi);
    // push toward the angularly nearer edge.
    const double phi = polar_angle(p);
    return (phi - cfg.xi < kTwoPi - phi) ? 2 : 1;
}

}  // namespace detail

inline ReflectResult reflect_step(const Vec2& proposed, const WedgeConfig& cfg) {
    if (contains(proposed, cfg)) return {proposed, 0.0, 0.0, false};
    const int edge = detail::violated_edge(proposed, cfg);
    const ReflectResult vertex{{0.0, 0.0}, 0.0, 0.0, true};
    if (edge == 0) return vertex;

    const Vec2& v = edge == 1 ? cfg.v1 : cfg.v2;
    const Vec2& n = edge == 1 ? cfg.n1 : cfg.n2;
    const Vec2 e = edge == 1 ? cfg.edge1() : cfg.edge2();
    const double vn = dot(v, n);
    const double a = -dot(n, proposed) / vn;
    if (!(vn > 0.0) || !std::isfinite(a))
        throw ConfigurationError("reflection direction is parallel to its edge; membership cannot be restored");

    Vec2 q = proposed + a * v;
    // Land exactly on the edge line.
    q = dot(q, e) * e;
    if (edge == 1) q.y = 0.0;
    if (dot(q, e) < 0.0 || !contains(q, cfg)) return vertex;

    ReflectResult r{q, 0.0, 0.0, false};
    (edge == 1 ? r.a1 : r.a2) = a;
    return r;
}

namespace detail {

inline std::size_t step_count(double dt, double t_end) {
    return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

inline PathBundle simulate_stream(const WedgeConfig& cfg, const SimParams& params, std::uint64_t stream) {
    params.validate(cfg);
    const std::size_t n = step_count(params.dt, params.t_end);
    const CounterRng rng(params.seed, stream);

    PathBundle b;
    if (!cfg.alpha_in_target_range())
        b.warnings.push_back("alpha = " + std::to_string(cfg.alpha) + " lies outside (1, 2)");
    b.times.resize(n + 1);
    b.z.resize(n + 1);
    b.x.resize(n + 1);
    b.pushes.resize(n + 1);
    b.times[0] = 0.0;
    b.z[0] = params.z0;
    b.x[0] = params.z0;
    for (std::size_t k = 1; k <= n; ++k) {
        b.times[k] = (k == n) ? params.t_end : static_cast<double>(k) * params.dt;
        const double h = b.times[k] - b.times[k - 1];
        const auto g = rng.normals(k - 1);
        const Vec2 dx{std::sqrt(h) * g[0], std::sqrt(h) * g[1]};
        const ReflectResult r = reflect_step(b.z[k - 1] + dx, cfg);
        if (!std::isfinite(r.point.x) || !std::isfinite(r.point.y) || !std::isfinite(dx.x) || !std::isfinite(dx.y))
            throw NumericalError(k, "non-finite state");
        b.x[k] = b.x[k - 1] + dx;
        b.z[k] = r.point;
        b.pushes[k] = {r.a1, r.a2, r.vertex_hit};
    }
    return b;
}

}  // namespace detail

/// One path on the grid 0 = t_0 < ... < t_N = t_end, using derived stream 0.
inline PathBundle simulate(const WedgeConfig& cfg, const SimParams& params) {
    return detail::simulate_stream(cfg, params, 0);
}

/// Path i uses the stream derived from (seed, i); the result is independent
/// of the worker count and execution order.
inline std::vector<PathBundle> batch_simulate(const WedgeConfig& cfg, const SimParams& params, std::size_t n_paths,
                                              unsigned threads = 0) {
    if (n_paths < 1) throw DomainError("n_paths", "must be >= 1");
    params.validate(cfg);
    std::vector<PathBundle> out(n_paths);
    parallel_for(n_paths, resolve_thread_count(threads),
                 [&](std::size_t i) { out[i] = detail::simulate_stream(cfg, params, i); });
    return out;
}

/// CSV with header t,z_x,z_y,x_x,x_y,a1,a2,vertex_hit.
inline void write_path_csv(std::ostream& os, const PathBundle& b) {
    os << "t,z_x,z_y,x_x,x_y,a1,a2,vertex_hit\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const PushRecord& p = b.pushes[k];
        os << b.times[k] << ',' << b.z[k].x << ',' << b.z[k].y << ',' << b.x[k].x << ',' << b.x[k].y << ',' << p.a1
           << ',' << p.a2 << ',' << (p.vertex_hit ? 1 : 0) << '\n';
    }
}

}  // namespace wedge_rbm
