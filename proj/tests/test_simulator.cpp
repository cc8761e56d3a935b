#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "wedge_rbm/simulator.hpp"
#include "wedge_rbm/stats.hpp"

using namespace wedge_rbm;
using namespace wedge_rbm::stats;

namespace {

const WedgeConfig kRef = make_wedge(kPi / 2, 3 * kPi / 8, 3 * kPi / 8);

SimParams params(double dt, double t_end, std::uint64_t seed, Vec2 z0 = {}) {
    SimParams p;
    p.z0 = z0;
    p.dt = dt;
    p.t_end = t_end;
    p.seed = seed;
    return p;
}

}  // namespace

TEST(ReflectStep, NormalReflection) {
    const ReflectResult r = reflect_step({1.0, -0.5}, make_wedge(kPi / 2, 0.0, 0.0));
    EXPECT_EQ(r.point, (Vec2{1.0, 0.0}));
    EXPECT_DOUBLE_EQ(r.a1, 0.5);
    EXPECT_EQ(r.a2, 0.0);
    EXPECT_FALSE(r.vertex_hit);
}

TEST(ReflectStep, ObliqueProjectionPastVertex) {
    // Single-edge projection: (1, -0.5) + 0.5 v1 = (1 - 0.5 tan(3pi/8), 0).
    const double landing = 1.0 - 0.5 * std::tan(3 * kPi / 8);
    EXPECT_NEAR(landing, -0.20711, 1e-5);
    const ReflectResult r = reflect_step({1.0, -0.5}, kRef);
    EXPECT_TRUE(r.vertex_hit);
    EXPECT_EQ(r.point, (Vec2{0.0, 0.0}));
}

TEST(ReflectStep, InsideUnchanged) {
    const ReflectResult r = reflect_step({0.2, 0.3}, kRef);
    EXPECT_EQ(r.point, (Vec2{0.2, 0.3}));
    EXPECT_EQ(r.a1, 0.0);
    EXPECT_EQ(r.a2, 0.0);
    EXPECT_FALSE(r.vertex_hit);
}

TEST(ReflectStep, BothEdgesViolatedGoesToVertex) {
    EXPECT_TRUE(reflect_step({-0.1, -0.1}, kRef).vertex_hit);
}

TEST(ReflectStep, EdgeTwoProjection) {
    const ReflectResult r = reflect_step({-0.01, 1.0}, kRef);
    EXPECT_FALSE(r.vertex_hit);
    EXPECT_GT(r.a2, 0.0);
    EXPECT_NEAR(r.point.x, 0.0, 1e-15);  // cos(pi/2) in double
    EXPECT_NEAR(r.point.y, 1.0 - 0.01 * std::tan(3 * kPi / 8), 1e-12);
}

TEST(Simulate, InvariantsHold) {
    const PathBundle b = simulate(kRef, params(1e-3, 2.0, 5, {0.3, 0.2}));
    ASSERT_EQ(b.size(), 2001u);
    EXPECT_EQ(b.times.front(), 0.0);
    EXPECT_EQ(b.times.back(), 2.0);
    for (std::size_t k = 1; k < b.size(); ++k) {
        ASSERT_GT(b.times[k], b.times[k - 1]);
        ASSERT_LE(distance_to_wedge(b.z[k], kRef), 1e-12);
        const PushRecord& p = b.pushes[k];
        ASSERT_GE(p.a1, 0.0);
        ASSERT_GE(p.a2, 0.0);
        if (p.vertex_hit) {
            EXPECT_EQ(b.z[k], (Vec2{0.0, 0.0}));
            continue;
        }
        ASSERT_FALSE(p.a1 > 0.0 && p.a2 > 0.0);
        const Vec2 rebuilt = b.z[k - 1] + (b.x[k] - b.x[k - 1]) + p.a1 * kRef.v1 + p.a2 * kRef.v2;
        ASSERT_NEAR(rebuilt.x, b.z[k].x, 1e-12);
        ASSERT_NEAR(rebuilt.y, b.z[k].y, 1e-12);
    }
}

TEST(Simulate, GridLengthRoundsUp) {
    EXPECT_EQ(simulate(kRef, params(0.3, 1.0, 1)).size(), 5u);
    EXPECT_EQ(simulate(kRef, params(0.25, 1.0, 1)).size(), 5u);
}

TEST(Simulate, InteriorPathIsUnreflected) {
    const PathBundle b = simulate(kRef, params(1e-4, 1e-3, 8, {5.0, 5.0}));
    for (std::size_t k = 0; k < b.size(); ++k) {
        EXPECT_EQ(b.z[k], b.x[k]);
        EXPECT_EQ(b.pushes[k], PushRecord{});
    }
}

TEST(Simulate, SameSeedIsBitIdentical) {
    EXPECT_EQ(simulate(kRef, params(1e-3, 1.0, 77)), simulate(kRef, params(1e-3, 1.0, 77)));
    EXPECT_FALSE(simulate(kRef, params(1e-3, 1.0, 77)) == simulate(kRef, params(1e-3, 1.0, 78)));
}

TEST(Simulate, DrivingIncrementsAreStandard) {
    const PathBundle b = simulate(kRef, params(1e-4, 10.0, 21));
    std::vector<double> dx, dy;
    double cross = 0.0;
    for (std::size_t k = 1; k < b.size(); ++k) {
        const Vec2 d = (1.0 / std::sqrt(1e-4)) * (b.x[k] - b.x[k - 1]);
        dx.push_back(d.x);
        dy.push_back(d.y);
        cross += d.x * d.y;
    }
    EXPECT_NEAR(mean(dx), 0.0, 0.02);
    EXPECT_NEAR(variance(dx), 1.0, 0.02);
    EXPECT_NEAR(variance(dy), 1.0, 0.02);
    EXPECT_NEAR(cross / dx.size(), 0.0, 0.02);
}

TEST(Simulate, RejectsBadParams) {
    EXPECT_THROW(simulate(kRef, params(0.0, 1.0, 1)), DomainError);
    EXPECT_THROW(simulate(kRef, params(2.0, 1.0, 1)), DomainError);
    EXPECT_THROW(simulate(kRef, params(1e-3, 1.0, 1, {-1.0, 0.5})), DomainError);
}

TEST(Simulate, WarnsOutsideRegime) {
    EXPECT_FALSE(simulate(make_wedge(kPi / 2, 0.0, 0.0), params(0.1, 1.0, 1)).warnings.empty());
    EXPECT_TRUE(simulate(kRef, params(0.1, 1.0, 1)).warnings.empty());
}

TEST(BatchSimulate, SinglePathEqualsSimulate) {
    const SimParams p = params(1e-3, 0.5, 4);
    EXPECT_EQ(batch_simulate(kRef, p, 1).front(), simulate(kRef, p));
}

TEST(BatchSimulate, SerialEqualsParallel) {
    const SimParams p = params(1e-3, 0.5, 4);
    const auto serial = batch_simulate(kRef, p, 4, 1);
    const auto parallel = batch_simulate(kRef, p, 4, 4);
    EXPECT_EQ(serial, parallel);
    EXPECT_FALSE(serial[0] == serial[1]);
    EXPECT_THROW(batch_simulate(kRef, p, 0), DomainError);
}

// Normal reflection in the quadrant decouples into two reflected 1-d Brownian
// motions; compare the terminal marginals with |B(t)| sampled directly.
TEST(Simulate, QuadrantMarginalsMatchReflectedBm) {
    const WedgeConfig quad = make_wedge(kPi / 2, 0.0, 0.0);
    const SimParams p = params(1e-4, 1.0, 2024);
    const std::size_t n = 10000;
    std::vector<double> zx(n), zy(n);
    parallel_for(n, resolve_thread_count(), [&](std::size_t i) {
        const PathBundle b = detail::simulate_stream(quad, p, i);
        zx[i] = b.z.back().x;
        zy[i] = b.z.back().y;
    });
    std::mt19937_64 gen(99);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> oracle(n);
    for (double& v : oracle) v = std::abs(g(gen));
    EXPECT_LT(ks_distance(zx, oracle), 0.02);
    EXPECT_LT(ks_distance(zy, oracle), 0.02);
}

TEST(WritePathCsv, HeaderAndRows) {
    std::ostringstream os;
    write_path_csv(os, simulate(kRef, params(0.25, 1.0, 1)));
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("t,z_x,z_y,x_x,x_y,a1,a2,vertex_hit\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 6);
}
