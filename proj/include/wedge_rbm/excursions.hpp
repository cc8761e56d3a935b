#pragma once

// Excursions of a sampled path away from the vertex, a count-based local
// time proxy, its inverse, and Hill-type tail-index estimators for the
// excursion durations and the increments of Y across excursions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wedge_rbm/errors.hpp"
#include "wedge_rbm/geometry.hpp"
#include "wedge_rbm/random.hpp"
#include "wedge_rbm/stats.hpp"

namespace wedge_rbm {

struct Excursion {
    std::size_t g_index = 0;
    std::size_t d_index = 0;
    double G = 0.0;
    double D = 0.0;
    double duration = 0.0;
    bool truncated_start = false;  // path starts outside the eps-ball: [0, first hit) is not an excursion
    bool truncated_end = false;    // path has not returned by the end of the grid
    Vec2 jump;                     // Y(D) - Y(G), once attached
    bool has_jump = false;

    bool complete() const noexcept { return !truncated_start && !truncated_end; }
};

struct ExcursionSet {
    double eps = 0.0;
    std::size_t n_samples = 0;
    std::vector<Excursion> intervals;
};

/// Maximal runs of samples with |Z| > eps, widened to the neighbouring
/// samples inside the eps-ball. Runs shorter than two time steps are dropped.
inline ExcursionSet excursions(std::span<const double> times, std::span<const Vec2> z, double eps) {
    if (!(eps > 0.0)) throw DomainError("eps", "must be > 0");
    if (times.size() != z.size()) throw DomainError("path", "times and samples differ in length");
    ExcursionSet set;
    set.eps = eps;
    set.n_samples = z.size();
    const std::size_t n = z.size();
    if (n < 2) return set;
    const double min_duration = 2.0 * (times[1] - times[0]) * (1.0 - 1e-9);

    std::size_t k = 0;
    while (k < n) {
        if (norm(z[k]) <= eps) {
            ++k;
            continue;
        }
        const std::size_t first = k;
        while (k < n && norm(z[k]) > eps) ++k;
        const std::size_t last = k - 1;
        Excursion e;
        e.truncated_start = first == 0;
        e.truncated_end = last == n - 1;
        e.g_index = e.truncated_start ? 0 : first - 1;
        e.d_index = e.truncated_end ? n - 1 : last + 1;
        e.G = times[e.g_index];
        e.D = times[e.d_index];
        e.duration = e.D - e.G;
        if (e.duration >= min_duration) set.intervals.push_back(e);
    }
    return set;
}

/// Records Y(D_i) - Y(G_i) on every interval.
inline void attach_jumps(ExcursionSet& set, std::span<const Vec2> y) {
    if (y.size() != set.n_samples) throw DomainError("y", "length differs from the excursion grid");
    for (Excursion& e : set.intervals) {
        e.jump = y[e.d_index] - y[e.g_index];
        e.has_jump = true;
    }
}

// ---------------------------------------------------------------------------
// Tail-index estimation

struct TailIndexEstimate {
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;
    double regression_estimate = 0.0;  // slope of log rank against log order statistic
};

namespace detail {

/// Hill index from descending-sorted data using the top k order statistics.
inline double hill_index_sorted_desc(std::span<const double> desc, std::size_t k) {
    const double threshold = desc[k];
    if (!(threshold > 0.0)) return std::numeric_limits<double>::infinity();
    double h = 0.0;
    for (std::size_t i = 0; i < k; ++i) h += std::log(desc[i] / threshold);
    h /= static_cast<double>(k);
    return h > 0.0 ? 1.0 / h : std::numeric_limits<double>::infinity();
}

}  // namespace detail

struct HillOptions {
    double fraction = 0.1;
    std::size_t bootstrap = 200;
    double confidence = 0.95;
    std::uint64_t seed = 0x5eed;
};

/// Hill estimator over the top ceil(fraction * n) order statistics with a
/// percentile bootstrap interval and a log-log rank regression cross-check.
inline TailIndexEstimate hill_estimate(std::span<const double> samples, const HillOptions& opt = {}) {
    const std::size_t n = samples.size();
    if (n < 50) throw EstimationError("tail index needs at least 50 samples (got " + std::to_string(n) + ")");
    if (!(opt.fraction > 0.0 && opt.fraction < 1.0)) throw DomainError("hill_fraction", "must lie in (0, 1)");
    for (double x : samples)
        if (!(x > 0.0) || !std::isfinite(x)) throw EstimationError("tail index needs positive finite samples");
    const auto k = static_cast<std::size_t>(std::ceil(opt.fraction * static_cast<double>(n)));
    if (k + 1 > n) throw EstimationError("fewer samples than the order statistics requested");

    std::vector<double> desc(samples.begin(), samples.end());
    std::sort(desc.begin(), desc.end(), std::greater<>());
    TailIndexEstimate est;
    est.n = n;
    est.k = k;
    est.estimate = detail::hill_index_sorted_desc(desc, k);
    if (!std::isfinite(est.estimate)) throw EstimationError("degenerate sample: top order statistics coincide");

    std::vector<double> lx, lr;
    for (std::size_t i = 0; i < k; ++i) {
        lx.push_back(std::log(desc[i]));
        lr.push_back(std::log(static_cast<double>(i + 1)));
    }
    est.regression_estimate = -stats::least_squares(lx, lr).slope;

    SequentialRng rng(opt.seed, 0xb0075);
    std::vector<double> boot;
    std::vector<double> resample(n);
    for (std::size_t b = 0; b < opt.bootstrap; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            resample[i] = desc[std::min(j, n - 1)];
        }
        std::sort(resample.begin(), resample.end(), std::greater<>());
        const double v = detail::hill_index_sorted_desc(resample, k);
        if (std::isfinite(v)) boot.push_back(v);
    }
    if (boot.empty()) {
        est.ci_lo = est.ci_hi = est.estimate;
    } else {
        const double tail = (1.0 - opt.confidence) / 2.0;
        est.ci_lo = stats::quantile(boot, tail);
        est.ci_hi = stats::quantile(boot, 1.0 - tail);
    }
    return est;
}

/// Tail index of excursion durations (stable subordinator index alpha/2).
inline TailIndexEstimate duration_tail_index(std::span<const double> durations, const HillOptions& opt = {}) {
    return hill_estimate(durations, opt);
}

/// Complete excursions only: their durations.
inline std::vector<double> complete_durations(const ExcursionSet& set) {
    std::vector<double> out;
    for (const Excursion& e : set.intervals)
        if (e.complete()) out.push_back(e.duration);
    return out;
}

/// Nonzero norms |Y(D_i) - Y(G_i)| of complete excursions. An excursion that
/// never reaches an edge band leaves Y unchanged and carries no jump.
inline std::vector<double> complete_jump_norms(const ExcursionSet& set) {
    std::vector<double> out;
    for (const Excursion& e : set.intervals) {
        if (!e.has_jump) throw DomainError("excursions", "jumps are not attached");
        if (e.complete() && norm(e.jump) > 0.0) out.push_back(norm(e.jump));
    }
    return out;
}

/// Tail index of |Y(D_i) - Y(G_i)| (alpha-stable jump index).
inline TailIndexEstimate stable_jump_index(std::span<const double> jump_norms, const HillOptions& opt = {}) {
    return hill_estimate(jump_norms, opt);
}

inline TailIndexEstimate stable_jump_index(const ExcursionSet& set, const HillOptions& opt = {}) {
    const std::vector<double> norms = complete_jump_norms(set);
    return hill_estimate(norms, opt);
}

// ---------------------------------------------------------------------------
// Local time proxy and its inverse

struct LocalTimeCurve {
    std::vector<double> times;
    std::vector<double> values;
    double s0 = 0.0;
    std::size_t qualifying = 0;
    /// The curve is defined up to a multiplicative constant; this one is
    /// normalized by its terminal value.
    static constexpr const char* normalization = "count-based, L(t_end) = 1";
};

namespace detail {
inline bool counts_toward_local_time(const Excursion& e) { return !e.truncated_start; }
}  // namespace detail

/// L rises linearly across the zero-set stretch preceding each excursion up
/// to (number of excursions longer than s0 started so far) / total, and is
/// constant on every excursion interval. An initial stretch outside the
/// eps-ball (path not started at the vertex) carries no local time.
inline LocalTimeCurve local_time_curve(std::span<const double> times, const ExcursionSet& exc, double s0) {
    if (!(s0 > 0.0)) throw DomainError("s0", "must be > 0");
    if (times.size() != exc.n_samples) throw DomainError("times", "length differs from the excursion grid");
    LocalTimeCurve L;
    L.s0 = s0;
    L.times.assign(times.begin(), times.end());
    L.values.assign(times.size(), 0.0);
    for (const Excursion& e : exc.intervals)
        if (detail::counts_toward_local_time(e) && e.duration > s0) ++L.qualifying;
    if (L.qualifying == 0) throw EstimationError("no excursion longer than s0");

    const double total = static_cast<double>(L.qualifying);
    std::size_t count = 0;
    std::size_t ramp_start = 0;  // first index of the current zero-set stretch
    double level = 0.0;
    for (const Excursion& e : exc.intervals) {
        if (!detail::counts_toward_local_time(e)) {
            ramp_start = e.d_index;
            continue;
        }
        if (e.duration > s0) ++count;
        const double target = static_cast<double>(count) / total;
        const double t0 = times[ramp_start];
        const double t1 = times[e.g_index];
        for (std::size_t k = ramp_start; k < e.g_index; ++k)
            L.values[k] = t1 > t0 ? level + (target - level) * (times[k] - t0) / (t1 - t0) : level;
        for (std::size_t k = e.g_index; k <= e.d_index; ++k) L.values[k] = target;
        level = target;
        ramp_start = e.d_index;
    }
    for (std::size_t k = ramp_start; k < L.values.size(); ++k) L.values[k] = level;
    L.values[0] = 0.0;
    return L;
}

struct InverseLocalTime {
    std::vector<double> jump_levels;  // L(G_i)
    std::vector<double> jump_sizes;   // D_i - G_i
    std::vector<std::size_t> excursion_index;

    /// L^{-1}(a) = sum of jump sizes with level <= a.
    double value(double a) const {
        double s = 0.0;
        for (std::size_t i = 0; i < jump_levels.size(); ++i)
            if (jump_levels[i] <= a) s += jump_sizes[i];
        return s;
    }

    double total() const {
        double s = 0.0;
        for (double x : jump_sizes) s += x;
        return s;
    }
};

inline InverseLocalTime inverse_local_time(const LocalTimeCurve& L, const ExcursionSet& exc) {
    if (L.values.size() != exc.n_samples) throw DomainError("local_time", "grid differs from the excursion set");
    InverseLocalTime inv;
    for (std::size_t i = 0; i < exc.intervals.size(); ++i) {
        const Excursion& e = exc.intervals[i];
        if (!detail::counts_toward_local_time(e)) continue;
        if (e.d_index >= L.values.size()) throw DomainError("excursions", "interval beyond the local-time grid");
        inv.jump_levels.push_back(L.values[e.g_index]);
        inv.jump_sizes.push_back(e.duration);
        inv.excursion_index.push_back(i);
    }
    if (inv.jump_levels.empty()) throw EstimationError("no excursions to invert");
    for (std::size_t i = 1; i < inv.jump_levels.size(); ++i)
        if (inv.jump_levels[i] < inv.jump_levels[i - 1])
            throw DomainError("local_time", "levels decrease across excursions; inputs are inconsistent");
    return inv;
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_excursions_header(std::ostream& os) { os << "path_id,i,G,D,duration,jump_norm\n"; }

inline void write_excursions_rows(std::ostream& os, std::size_t path_id, const ExcursionSet& set) {
    os << std::setprecision(17);
    for (std::size_t i = 0; i < set.intervals.size(); ++i) {
        const Excursion& e = set.intervals[i];
        os << path_id << ',' << i << ',' << e.G << ',' << e.D << ',' << e.duration << ',';
        if (e.has_jump)
            os << norm(e.jump);
        else
            os << "nan";
        os << '\n';
    }
}

inline void write_indices_header(std::ostream& os) { os << "estimator,estimate,ci_lo,ci_hi,n\n"; }

inline void write_indices_row(std::ostream& os, const std::string& name, const TailIndexEstimate& e) {
    os << std::setprecision(17) << name << ',' << e.estimate << ',' << e.ci_lo << ',' << e.ci_hi << ',' << e.n << '\n';
}

}  // namespace wedge_rbm
