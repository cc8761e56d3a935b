#pragma once

// Counter-based random numbers. Every variate is a pure function of
// (seed, stream, counter), so batch results never depend on scheduling.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace wedge_rbm {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter single_round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// SplitMix64 finalizer; used to derive stream keys from (seed, index).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Uniform double in the open interval (0, 1) from 53 random bits.
constexpr double open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, giving close to full double precision.
inline double normal_quantile(double p) noexcept {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// A keyed stream of variates addressed by an explicit 64-bit counter.
/// Each counter value yields two independent 53-bit uniforms.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(mix64(stream ^ mix64(seed))) {}

    /// Two uniforms in (0, 1) for the given counter.
    std::array<double, 2> uniforms(std::uint64_t counter) const noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                                      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const auto out = Philox4x32::generate(ctr, key_);
        const std::uint64_t w0 = (std::uint64_t{out[0]} << 32) | out[1];
        const std::uint64_t w1 = (std::uint64_t{out[2]} << 32) | out[3];
        return {open_unit(w0), open_unit(w1)};
    }

    /// Two independent standard normals (inverse-CDF transform).
    std::array<double, 2> normals(std::uint64_t counter) const noexcept {
        const auto u = uniforms(counter);
        return {normal_quantile(u[0]), normal_quantile(u[1])};
    }

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
};

/// Sequential convenience wrapper: draws successive counters of one stream.
class SequentialRng {
public:
    SequentialRng(std::uint64_t seed, std::uint64_t stream) noexcept : rng_(seed, stream) {}

    double uniform() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const auto u = rng_.uniforms(counter_++);
        spare_ = u[1];
        has_spare_ = true;
        return u[0];
    }
    double normal() noexcept { return normal_quantile(uniform()); }
    double exponential() noexcept { return -std::log(uniform()); }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace wedge_rbm
