#pragma once

// Small descriptive-statistics helpers shared by estimators and tests.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace wedge_rbm::stats {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample variance with n - 1 denominator.
inline double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

inline double standard_error(std::span<const double> xs) {
    return xs.empty() ? 0.0 : stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

/// Linear-interpolated quantile, q in [0, 1].
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - w) + xs[hi] * w;
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Ordinary least-squares slope and intercept of y on x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace wedge_rbm::stats
