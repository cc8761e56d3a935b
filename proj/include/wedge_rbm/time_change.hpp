#pragma once

// Time change phi_{p,q} built from excursion data. On the zero set it is the
// excursion sum of duration^q over excursions that started strictly earlier;
// inside an excursion it interpolates by the running p-variation of Y.

#include <cmath>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wedge_rbm/errors.hpp"
#include "wedge_rbm/excursions.hpp"
#include "wedge_rbm/variation.hpp"

namespace wedge_rbm {

enum class SegmentTag { inverse_range, zero_set_limit, excursion_interior };

inline const char* to_string(SegmentTag t) {
    switch (t) {
        case SegmentTag::inverse_range: return "inverse-range";
        case SegmentTag::zero_set_limit: return "zero-set-limit";
        case SegmentTag::excursion_interior: return "excursion-interior";
    }
    return "?";
}

struct TimeChange {
    std::vector<double> times;
    std::vector<double> phi;
    std::vector<SegmentTag> tags;
    std::vector<std::string> warnings;

    /// Largest decrease between consecutive samples (0 when nondecreasing).
    double max_negative_increment() const {
        double worst = 0.0;
        for (std::size_t k = 1; k < phi.size(); ++k) worst = std::min(worst, phi[k] - phi[k - 1]);
        return worst;
    }
};

/// Drops excursions on which y has no variation; returns how many were removed.
inline std::size_t drop_degenerate_excursions(ExcursionSet& exc, std::span<const Vec2> y) {
    if (y.size() != exc.n_samples) throw DomainError("y", "length differs from the excursion grid");
    std::size_t removed = 0;
    std::vector<Excursion> kept;
    for (const Excursion& e : exc.intervals) {
        bool moves = false;
        for (std::size_t k = e.g_index + 1; k <= e.d_index && !moves; ++k) moves = !(y[k] == y[e.g_index]);
        if (moves)
            kept.push_back(e);
        else
            ++removed;
    }
    exc.intervals = std::move(kept);
    return removed;
}

/// L and its inverse are checked for consistency with the excursion set; the
/// zero-set values use the excursion-sum form, which agrees with the
/// q-variation of the inverse local time for alpha/2 < q < 1.
inline TimeChange build_phi_pq(std::span<const double> times, std::span<const Vec2> z, std::span<const Vec2> y_hat,
                               const ExcursionSet& exc, const LocalTimeCurve& L, const InverseLocalTime& linv, double p,
                               double q) {
    detail::require_exponent(p);
    if (!(q > 0.0)) throw DomainError("q", "must be > 0");
    const std::size_t n = times.size();
    if (z.size() != n || y_hat.size() != n || exc.n_samples != n || L.values.size() != n)
        throw DomainError("path", "inputs are sampled on different grids");
    if (exc.intervals.empty()) throw EstimationError("no excursions");
    std::size_t counted = 0;
    for (const Excursion& e : exc.intervals)
        if (detail::counts_toward_local_time(e)) ++counted;
    if (linv.jump_sizes.size() != counted) throw DomainError("inverse_local_time", "does not match the excursion set");

    TimeChange tc;
    tc.times.assign(times.begin(), times.end());
    tc.phi.assign(n, 0.0);
    tc.tags.assign(n, SegmentTag::inverse_range);
    if (!(q < 1.0)) tc.warnings.push_back("q >= 1: the excursion-sum form need not match the inverse-time variation");

    double base = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < exc.intervals.size(); ++i) {
        const Excursion& e = exc.intervals[i];
        for (; k <= e.g_index && k < n; ++k) tc.phi[k] = base;
        const std::span<const Vec2> piece = y_hat.subspan(e.g_index, e.d_index - e.g_index + 1);
        const std::vector<double> vp = prefix_p_variation(piece, p);
        const double total = vp.back();
        if (!(total > 0.0)) throw DegenerateExcursionError(i, "Y has zero p-variation on the excursion");
        const double weight = std::pow(e.duration, q);
        for (std::size_t j = e.g_index + 1; j < e.d_index; ++j) {
            tc.phi[j] = base + weight * (vp[j - e.g_index] / total);
            tc.tags[j] = SegmentTag::excursion_interior;
        }
        tc.tags[e.g_index] = SegmentTag::zero_set_limit;
        base += weight;
        tc.phi[e.d_index] = base;
        tc.tags[e.d_index] = SegmentTag::zero_set_limit;
        k = e.d_index + 1;
    }
    for (; k < n; ++k) tc.phi[k] = base;
    return tc;
}

/// Evaluates the excursion sum at an arbitrary time on the zero set.
inline double phi_on_zero_set(const ExcursionSet& exc, double t, double q) {
    double s = 0.0;
    for (const Excursion& e : exc.intervals)
        if (e.G < t) s += std::pow(e.duration, q);
    return s;
}

inline void write_phi_csv(std::ostream& os, const TimeChange& tc) {
    os << "t,phi,tag\n" << std::setprecision(17);
    for (std::size_t k = 0; k < tc.phi.size(); ++k) os << tc.times[k] << ',' << tc.phi[k] << ',' << to_string(tc.tags[k]) << '\n';
}

}  // namespace wedge_rbm
