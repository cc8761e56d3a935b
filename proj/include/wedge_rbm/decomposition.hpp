#pragma once

// Boundary-layer extraction of the martingale part of a sampled reflected
// path. For a layer width delta the path is watched between its entries into
// S_{2 delta} and its subsequent exits from the interior of S_delta; the
// increments collected on those stretches form W^delta. Along a sequence
// delta(n) = delta0 * ratio^{-n} with ratio > 2 the W^delta(n) are Cauchy, and
// the finest one is taken as the Brownian part.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wedge_rbm/geometry.hpp"
#include "wedge_rbm/random.hpp"
#include "wedge_rbm/simulator.hpp"

namespace wedge_rbm {

struct LayerCrossing {
    std::size_t sigma = 0;  // grid index of entry into S_{2 delta}
    std::size_t tau = 0;    // grid index of the next exit from int(S_delta)
    double t_sigma = 0.0;
    double t_tau = 0.0;
    bool open = false;      // no exit before the end of the grid; tau is the last index
};

struct LayerCrossings {
    double delta = 0.0;
    std::vector<LayerCrossing> pairs;
};

/// Alternating first-entry / first-exit indices, grid resolved.
inline LayerCrossings layer_crossings(std::span<const double> times, std::span<const Vec2> z, const WedgeConfig& cfg,
                                      double delta) {
    if (!(delta > 0.0)) throw DomainError("delta", "must be > 0");
    if (times.size() != z.size()) throw DomainError("path", "times and samples differ in length");
    LayerCrossings out;
    out.delta = delta;
    const std::size_t n = z.size();
    std::size_t k = 0;
    while (k < n) {
        std::size_t sigma = k;
        while (sigma < n && !contains(z[sigma], cfg, 2.0 * delta)) ++sigma;
        if (sigma == n) break;
        std::size_t tau = sigma;
        while (tau < n && contains_interior(z[tau], cfg, delta)) ++tau;
        LayerCrossing c;
        c.sigma = sigma;
        c.t_sigma = times[sigma];
        if (tau == n) {
            c.tau = n - 1;
            c.open = true;
        } else {
            c.tau = tau;
        }
        c.t_tau = times[c.tau];
        out.pairs.push_back(c);
        if (c.open) break;
        k = tau;
    }
    return out;
}

inline LayerCrossings layer_crossings(const PathBundle& path, const WedgeConfig& cfg, double delta) {
    return layer_crossings(path.times, path.z, cfg, delta);
}

/// W^delta(t_k) = sum_m [Z(t_k ^ tau_m) - Z(t_k ^ sigma_m)].
inline std::vector<Vec2> wdelta(std::span<const Vec2> z, const LayerCrossings& lc) {
    std::vector<Vec2> w(z.size());
    Vec2 base;
    std::size_t k = 0;
    for (const LayerCrossing& c : lc.pairs) {
        for (; k < c.sigma; ++k) w[k] = base;
        for (; k <= c.tau; ++k) w[k] = base + (z[k] - z[c.sigma]);
        base = base + (z[c.tau] - z[c.sigma]);
    }
    for (; k < z.size(); ++k) w[k] = base;
    return w;
}

/// Z - z0 - W built from its own increments, so it is exactly constant
/// across every collection stretch [sigma, tau].
inline std::vector<Vec2> wdelta_complement(std::span<const Vec2> z, const LayerCrossings& lc) {
    std::vector<Vec2> y(z.size());
    Vec2 base;
    std::size_t anchor = 0, k = 0;
    for (const LayerCrossing& c : lc.pairs) {
        for (; k <= c.sigma; ++k) y[k] = base + (z[k] - z[anchor]);
        const Vec2 held = y[c.sigma];
        for (; k <= c.tau; ++k) y[k] = held;
        base = held;
        anchor = c.tau;
    }
    for (; k < z.size(); ++k) y[k] = base + (z[k] - z[anchor]);
    return y;
}

inline std::vector<Vec2> wdelta(std::span<const double> times, std::span<const Vec2> z, const WedgeConfig& cfg,
                                double delta) {
    return wdelta(z, layer_crossings(times, z, cfg, delta));
}

inline std::vector<Vec2> wdelta(const PathBundle& path, const WedgeConfig& cfg, double delta) {
    return wdelta(path.times, path.z, cfg, delta);
}

/// Left-point Lebesgue time spent in S \ S_{2 delta}.
inline double layer_occupation(std::span<const double> times, std::span<const Vec2> z, const WedgeConfig& cfg,
                               double delta) {
    double total = 0.0;
    for (std::size_t k = 1; k < z.size(); ++k)
        if (!contains(z[k - 1], cfg, 2.0 * delta)) total += times[k] - times[k - 1];
    return total;
}

struct Decomposition {
    std::vector<Vec2> x_hat;
    std::vector<Vec2> y_hat;
    std::vector<double> delta_seq;
    std::vector<double> cauchy_diag;      // sup_t |W^{delta(n+1)} - W^{delta(n)}|, one per adjacent pair
    std::vector<double> occupation_diag;  // time in S \ S_{2 delta(n)}, one per level
    std::vector<Vec2> w_terminal;         // W^{delta(n)}(T), one per level
    std::vector<std::string> warnings;
};

/// Delta levels delta0 * ratio^{-n}, n = 1 .. levels; X_hat uses the finest.
inline Decomposition extract_martingale_part(std::span<const double> times, std::span<const Vec2> z,
                                             const WedgeConfig& cfg, double delta0, double ratio, int levels) {
    if (!(delta0 > 0.0)) throw DomainError("delta0", "must be > 0");
    if (!(ratio > 2.0)) throw DomainError("delta_ratio", "must be > 2");
    if (levels < 3) throw DomainError("delta_levels", "must be >= 3");
    if (z.empty()) throw DomainError("path", "must be non-empty");

    Decomposition d;
    std::vector<Vec2> previous;
    LayerCrossings finest;
    for (int n = 1; n <= levels; ++n) {
        const double delta = delta0 * std::pow(ratio, -n);
        LayerCrossings lc = layer_crossings(times, z, cfg, delta);
        std::vector<Vec2> w = wdelta(z, lc);
        finest = std::move(lc);
        d.delta_seq.push_back(delta);
        d.occupation_diag.push_back(layer_occupation(times, z, cfg, delta));
        d.w_terminal.push_back(w.back());
        if (n > 1) {
            double sup = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) sup = std::max(sup, norm(w[k] - previous[k]));
            d.cauchy_diag.push_back(sup);
        }
        previous = std::move(w);
    }
    const std::size_t m = d.cauchy_diag.size();
    if (m >= 2 && d.cauchy_diag[m - 1] >= d.cauchy_diag[m - 2])
        d.warnings.push_back("cauchy_diag did not decrease across the last two levels");

    // Y_hat is built directly so that it has no rounding drift where W moves;
    // X_hat = Z - Y_hat then equals W + z0 up to rounding.
    d.y_hat = wdelta_complement(z, finest);
    d.x_hat.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) d.x_hat[k] = z[k] - d.y_hat[k];
    return d;
}

inline Decomposition extract_martingale_part(const PathBundle& path, const WedgeConfig& cfg, double delta0,
                                             double ratio, int levels) {
    return extract_martingale_part(path.times, path.z, cfg, delta0, ratio, levels);
}

/// CSV with header level,delta,cauchy_sup,occupation_time. The last level has
/// no successor and reports cauchy_sup as nan.
inline void write_decomposition_csv(std::ostream& os, const Decomposition& d) {
    os << "level,delta,cauchy_sup,occupation_time\n" << std::setprecision(17);
    for (std::size_t n = 0; n < d.delta_seq.size(); ++n) {
        os << n << ',' << d.delta_seq[n] << ',';
        if (n < d.cauchy_diag.size())
            os << d.cauchy_diag[n];
        else
            os << "nan";
        os << ',' << d.occupation_diag[n] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Edge-pushing components u = R^{-1} (Y - Y(start)) on an excursion

struct PushComponents {
    std::size_t start = 0;
    std::size_t end = 0;
    std::vector<Vec2> u;                 // (u1, u2) per sample in [start, end]
    double negative_increment[2] = {0.0, 0.0};  // largest decrease of u_j
    double off_edge_increase[2] = {0.0, 0.0};   // |v_j| * increase of u_j while Z is off edge j
    double total_variation = 0.0;        // sum_j |v_j| * sum |du_j|

    double off_edge_fraction() const noexcept {
        return total_variation > 0.0 ? (off_edge_increase[0] + off_edge_increase[1]) / total_variation : 0.0;
    }
};

/// Per-step increments of u with magnitude <= `noise` are rounding residue of
/// Y = Z - X and are left out of the residuals.
inline PushComponents pushing_components(std::span<const Vec2> z, std::span<const Vec2> y, std::size_t start,
                                         std::size_t end, const WedgeConfig& cfg, double band, double noise = 0.0) {
    if (start > end || end >= z.size() || z.size() != y.size()) throw DomainError("interval", "out of range");
    if (!(noise >= 0.0)) throw DomainError("noise", "must be >= 0");
    const Mat2 rinv = cfg.R.inverse();
    PushComponents pc;
    pc.start = start;
    pc.end = end;
    pc.u.reserve(end - start + 1);
    const double len[2] = {norm(cfg.v1), norm(cfg.v2)};
    for (std::size_t k = start; k <= end; ++k) {
        pc.u.push_back(rinv * (y[k] - y[start]));
        if (k == start) continue;
        const Vec2 du = pc.u.back() - pc.u[pc.u.size() - 2];
        const double inc[2] = {du.x, du.y};
        const bool near[2] = {distance_to_edge1(z[k], cfg) <= band, distance_to_edge2(z[k], cfg) <= band};
        for (int j = 0; j < 2; ++j) {
            if (std::abs(inc[j]) <= noise) continue;
            pc.total_variation += len[j] * std::abs(inc[j]);
            if (inc[j] < 0.0) pc.negative_increment[j] = std::max(pc.negative_increment[j], -inc[j]);
            if (inc[j] > 0.0 && !near[j]) pc.off_edge_increase[j] += len[j] * inc[j];
        }
    }
    return pc;
}

// ---------------------------------------------------------------------------
// Brownian-motion diagnostics

struct BmStatistics {
    std::size_t n_increments = 0;
    double qv_x = 0.0;
    double qv_y = 0.0;
    double cross_qv = 0.0;
    double cross_qv_se = 0.0;  // standard error of cross_qv under independent coordinates
    double skewness = 0.0;     // pooled standardized increments
    double kurtosis = 0.0;     // non-excess
    double normality_p = 0.0;  // Jarque-Bera, chi-square(2) tail
};

inline BmStatistics bm_diagnostics(std::span<const Vec2> path) {
    if (path.size() < 100) throw DomainError("path", "bm_diagnostics needs at least 100 samples");
    BmStatistics s;
    const std::size_t n = path.size() - 1;
    s.n_increments = n;
    std::vector<double> dx(n), dy(n);
    double cross_sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        dx[k] = path[k + 1].x - path[k].x;
        dy[k] = path[k + 1].y - path[k].y;
        s.qv_x += dx[k] * dx[k];
        s.qv_y += dy[k] * dy[k];
        s.cross_qv += dx[k] * dy[k];
        cross_sq += (dx[k] * dy[k]) * (dx[k] * dy[k]);
    }
    s.cross_qv_se = std::sqrt(cross_sq);

    double m3 = 0.0, m4 = 0.0;
    std::size_t pooled = 0;
    bool degenerate = false;
    for (const std::vector<double>* v : {&dx, &dy}) {
        double mean = 0.0;
        for (double d : *v) mean += d;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double d : *v) var += (d - mean) * (d - mean);
        var /= static_cast<double>(n);
        if (!(var > 0.0)) {
            degenerate = true;
            continue;
        }
        const double sd = std::sqrt(var);
        for (double d : *v) {
            const double zs = (d - mean) / sd;
            m3 += zs * zs * zs;
            m4 += zs * zs * zs * zs;
        }
        pooled += n;
    }
    if (degenerate || pooled == 0) {
        s.normality_p = 0.0;
        if (pooled > 0) {
            s.skewness = m3 / static_cast<double>(pooled);
            s.kurtosis = m4 / static_cast<double>(pooled);
        }
        return s;
    }
    s.skewness = m3 / static_cast<double>(pooled);
    s.kurtosis = m4 / static_cast<double>(pooled);
    const double jb = static_cast<double>(pooled) / 6.0 *
                      (s.skewness * s.skewness + (s.kurtosis - 3.0) * (s.kurtosis - 3.0) / 4.0);
    s.normality_p = std::exp(-jb / 2.0);
    return s;
}

}  // namespace wedge_rbm
