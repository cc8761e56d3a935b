#pragma once

// Strong p-variation of sampled planar paths.
//
// For p >= 1 the supremum over partitions of the sample index set is attained
// by a partition containing both endpoints, and
//     V[i] = max_{j < i} ( V[j] + |x_i - x_j|^p ),   V[0] = 0,
// is the p-variation of the prefix x_0..x_i. The naive recursion is O(n^2).
// The implementation below visits candidate j through a segment tree of
// bounding boxes: a block of candidates [lo, hi] is skipped when
//     V[min(hi, i-2)] + (max distance from x_i to the block's box)^p <= best,
// which bounds every candidate in the block from above because V is
// nondecreasing. The pruning never discards a strictly better candidate, so
// the result equals the full O(n^2) maximum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "wedge_rbm/errors.hpp"
#include "wedge_rbm/geometry.hpp"

namespace wedge_rbm {

namespace detail {

template <class Real>
Real increment_power(const Vec2& a, const Vec2& b, Real p) {
    const Real dx = static_cast<Real>(b.x) - static_cast<Real>(a.x);
    const Real dy = static_cast<Real>(b.y) - static_cast<Real>(a.y);
    const Real d = std::sqrt(dx * dx + dy * dy);
    return p == Real(1) ? d : std::pow(d, p);
}

struct Box {
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    void add(const Box& o) noexcept {
        xmin = std::min(xmin, o.xmin);
        xmax = std::max(xmax, o.xmax);
        ymin = std::min(ymin, o.ymin);
        ymax = std::max(ymax, o.ymax);
    }
};

template <class Real>
Real max_distance(const Vec2& p, const Box& b) {
    const Real dx = std::max(std::abs(static_cast<Real>(p.x) - static_cast<Real>(b.xmin)),
                             std::abs(static_cast<Real>(p.x) - static_cast<Real>(b.xmax)));
    const Real dy = std::max(std::abs(static_cast<Real>(p.y) - static_cast<Real>(b.ymin)),
                             std::abs(static_cast<Real>(p.y) - static_cast<Real>(b.ymax)));
    return std::sqrt(dx * dx + dy * dy);
}

/// Exact prefix p-variation, p >= 1.
template <class Real>
std::vector<Real> prefix_variation_impl(std::span<const Vec2> pts, Real p) {
    const std::size_t n = pts.size();
    std::vector<Real> v(n, Real(0));
    if (n < 2) return v;

    std::size_t size = 1;
    while (size < n) size <<= 1;
    std::vector<Box> tree(2 * size);
    for (std::size_t i = 0; i < n; ++i) tree[size + i] = {pts[i].x, pts[i].x, pts[i].y, pts[i].y};
    for (std::size_t i = size - 1; i >= 1; --i) {
        tree[i] = tree[2 * i];
        tree[i].add(tree[2 * i + 1]);
    }

    struct Frame {
        std::size_t node, lo, hi;
    };
    std::vector<Frame> stack;
    for (std::size_t i = 1; i < n; ++i) {
        Real best = v[i - 1] + increment_power<Real>(pts[i - 1], pts[i], p);
        if (i >= 2) {
            const std::size_t last = i - 2;
            stack.clear();
            stack.push_back({1, 0, size - 1});
            while (!stack.empty()) {
                const Frame f = stack.back();
                stack.pop_back();
                if (f.lo > last) continue;
                const std::size_t hi = std::min(f.hi, last);
                const Real d = max_distance<Real>(pts[i], tree[f.node]);
                const Real bound = v[hi] + (p == Real(1) ? d : std::pow(d, p));
                if (bound <= best) continue;
                if (f.lo == f.hi) {
                    const Real cand = v[f.lo] + increment_power<Real>(pts[f.lo], pts[i], p);
                    if (cand > best) best = cand;
                    continue;
                }
                const std::size_t mid = f.lo + (f.hi - f.lo) / 2;
                // Left child pushed first so the right (nearer) block is explored first.
                stack.push_back({2 * f.node, f.lo, mid});
                stack.push_back({2 * f.node + 1, mid + 1, f.hi});
            }
        }
        v[i] = best;
    }
    return v;
}

inline void require_exponent(double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw UnsupportedExponentError("exact p-variation requires p >= 1 (got " + std::to_string(p) + ")");
}

}  // namespace detail

/// V_p of every prefix: result[k] = V_p(points[0..k]). p >= 1.
inline std::vector<double> prefix_p_variation(std::span<const Vec2> points, double p) {
    detail::require_exponent(p);
    return detail::prefix_variation_impl<double>(points, p);
}

/// Exact strong p-variation over all sub-partitions of the sample indices.
inline double strong_p_variation(std::span<const Vec2> points, double p) {
    detail::require_exponent(p);
    if (points.size() < 2) throw DomainError("points", "need at least 2 points");
    return detail::prefix_variation_impl<double>(points, p).back();
}

/// Exhaustive maximum over all 2^(n-2) partitions containing both endpoints.
inline double brute_force_p_variation(std::span<const Vec2> points, double p) {
    const std::size_t n = points.size();
    if (n > 14) throw SizeError("brute-force p-variation is limited to 14 points");
    if (n < 2) throw DomainError("points", "need at least 2 points");
    if (!(p > 0.0)) throw UnsupportedExponentError("p must be positive");
    const std::uint32_t interior = static_cast<std::uint32_t>(n - 2);
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
        double sum = 0.0;
        std::size_t prev = 0;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            if (mask & (1u << (j - 1))) {
                sum += detail::increment_power<double>(points[prev], points[j], p);
                prev = j;
            }
        }
        sum += detail::increment_power<double>(points[prev], points[n - 1], p);
        best = std::max(best, sum);
    }
    return best;
}

/// Sum of p-th powers of consecutive increments. This is the finest-partition
/// sum used to track divergence trends for p < 1, where the exact DP is not
/// offered.
inline double fine_partition_sum(std::span<const Vec2> points, double p) {
    double s = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) s += detail::increment_power<double>(points[k - 1], points[k], p);
    return s;
}

/// Sum of squared increments over the partition with the given index stride.
inline double energy_sum(std::span<const Vec2> points, std::size_t stride) {
    if (stride < 1) throw DomainError("stride", "must be >= 1");
    double s = 0.0;
    for (std::size_t k = stride; k < points.size(); k += stride) {
        const Vec2 d = points[k] - points[k - stride];
        s += dot(d, d);
    }
    return s;
}

/// Every stride-th sample, starting at index 0.
template <class T>
std::vector<T> subsample(std::span<const T> xs, std::size_t stride) {
    std::vector<T> out;
    if (stride < 1) throw DomainError("stride", "must be >= 1");
    out.reserve(xs.size() / stride + 1);
    for (std::size_t k = 0; k < xs.size(); k += stride) out.push_back(xs[k]);
    return out;
}

struct VariationLevel {
    double mesh = 0.0;
    std::size_t n_points = 0;
    double value = 0.0;
    bool monotone = true;  // value >= the value at the previous (coarser) level
};

struct VariationReport {
    double p = 0.0;
    std::vector<VariationLevel> levels;  // coarsest first
};

/// p-variation on nested sub-grids, one level per stride (given coarsest
/// first). For p < 1 the finest-partition sum is reported instead.
inline VariationReport variation_report(std::span<const double> times, std::span<const Vec2> points, double p,
                                        std::span<const std::size_t> strides) {
    VariationReport r;
    r.p = p;
    double previous = -1.0;
    for (std::size_t s : strides) {
        const std::vector<Vec2> sub = subsample(points, s);
        VariationLevel lv;
        lv.n_points = sub.size();
        lv.mesh = (times.size() > s) ? times[s] - times[0] : (times.empty() ? 0.0 : times.back() - times.front());
        lv.value = p >= 1.0 ? strong_p_variation(sub, p) : fine_partition_sum(sub, p);
        lv.monotone = previous < 0.0 || lv.value >= previous;
        previous = lv.value;
        r.levels.push_back(lv);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Hoelder reparametrization f = g o phi with phi(t) = V_p(f, [0, t])

struct HolderReparam {
    std::vector<double> phi;
    std::vector<std::pair<double, Vec2>> g;  // (phi(t_k), f(t_k))
    double holder_constant = 0.0;            // max |g(s') - g(s)| / |s' - s|^{1/p}
};

/// The prefix variation is accumulated in extended precision: the exponent
/// 1/p is applied to differences phi_k - phi_j that can be many orders of
/// magnitude below phi itself.
inline HolderReparam holder_reparam(std::span<const Vec2> points, double p) {
    detail::require_exponent(p);
    if (points.size() < 2) throw DomainError("points", "need at least 2 points");
    using Real = long double;
    const std::vector<Real> phi = detail::prefix_variation_impl<Real>(points, static_cast<Real>(p));

    HolderReparam h;
    h.phi.reserve(phi.size());
    h.g.reserve(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        h.phi.push_back(static_cast<double>(phi[k]));
        h.g.emplace_back(static_cast<double>(phi[k]), points[k]);
    }
    const Real inv_p = Real(1) / static_cast<Real>(p);
    Real worst = 0;
    for (std::size_t k = 1; k < points.size(); ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            const Real dist = detail::increment_power<Real>(points[j], points[k], Real(1));
            const Real gap = phi[k] - phi[j];
            if (gap <= 0) {
                if (dist > 0)
                    throw DomainError("points", "phi is constant across distinct points; g is not well defined");
                continue;
            }
            worst = std::max(worst, dist / std::pow(gap, inv_p));
        }
    }
    h.holder_constant = static_cast<double>(worst);
    return h;
}

}  // namespace wedge_rbm
