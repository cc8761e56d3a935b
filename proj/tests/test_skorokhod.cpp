#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "wedge_rbm/excursions.hpp"
#include "wedge_rbm/skorokhod.hpp"
#include "wedge_rbm/stats.hpp"
#include "wedge_rbm/variation.hpp"

using namespace wedge_rbm;

namespace {

const WedgeConfig kRef = make_wedge(kPi / 2, 3 * kPi / 8, 3 * kPi / 8);

struct Triple {
    std::vector<Vec2> z, y, x;
};

// Z rides edge 1 while Y = sign * v1 * u(t) with u increasing.
Triple riding_edge1(double sign) {
    Triple t;
    for (int k = 0; k < 20; ++k) {
        const double u = 0.01 * k * k;
        t.z.push_back({1.0 + 0.1 * k, 0.0});
        t.y.push_back((sign * u) * kRef.v1);
        t.x.push_back(t.z.back() - t.y.back());
    }
    return t;
}

Triple interior_only() {
    Triple t;
    for (int k = 0; k < 10; ++k) {
        t.z.push_back({1.0 + 0.05 * k, 1.0 + 0.03 * k * k});
        t.y.push_back({});
        t.x.push_back(t.z.back());
    }
    return t;
}

std::vector<PathBundle> paths(std::size_t n, std::uint64_t seed) {
    SimParams p;
    p.dt = 1e-4;
    p.t_end = 1.0;
    p.seed = seed;
    return batch_simulate(kRef, p, n);
}

}  // namespace

TEST(CheckSp, InteriorOnly) {
    const Triple t = interior_only();
    const SPReport r = check_sp(t.z, t.y, t.x, kRef, 0, 9, 1e-9);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.additivity_residual, 0.0);
    EXPECT_EQ(r.containment_violation, 0.0);
    EXPECT_EQ(r.total_variation, 0.0);
    EXPECT_EQ(r.offboundary_increase, 0.0);
    EXPECT_EQ(r.direction_residual_deg, 0.0);
    EXPECT_EQ(r.monotonicity_residual, 0.0);
}

TEST(CheckSp, RidingEdgeOnePasses) {
    const Triple t = riding_edge1(1.0);
    const SPReport r = check_sp(t.z, t.y, t.x, kRef, 0, 19, 1e-9);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.direction_residual_deg, 1e-6);
    EXPECT_LT(r.variation_identity_residual, 1e-12);
    EXPECT_NEAR(r.total_variation, 0.01 * 19 * 19 * norm(kRef.v1), 1e-12);
}

TEST(CheckSp, NegatedPushFails) {
    const Triple t = riding_edge1(-1.0);
    const SPReport r = check_sp(t.z, t.y, t.x, kRef, 0, 19, 1e-9);
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.direction_residual_deg, 2.0);
    EXPECT_GT(r.monotonicity_residual, 1e-9);
}

TEST(CheckSp, OffBoundaryPushFails) {
    Triple t = interior_only();
    t.y[5] = {0.1, 0.0};
    for (int k = 5; k < 10; ++k) {
        t.y[k] = {0.1, 0.0};
        t.x[k] = t.z[k] - t.y[k];
    }
    const SPReport r = check_sp(t.z, t.y, t.x, kRef, 0, 9, 1e-9);
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.offboundary_increase, 0.1, 1e-15);
}

TEST(CheckSp, VertexVisits) {
    Triple t = interior_only();
    t.z[4] = {};
    t.x[4] = t.z[4] - t.y[4];
    EXPECT_THROW(check_sp(t.z, t.y, t.x, kRef, 0, 9, 1e-9), PreconditionError);
    const SPReport r = check_sp(t.z, t.y, t.x, kRef, 0, 4, 1e-9);
    EXPECT_TRUE(r.end_vertex_excluded);
    EXPECT_EQ(r.end, 3u);
    EXPECT_THROW(check_sp(t.z, t.y, t.x, kRef, 4, 4, 1e-9), DomainError);
}

TEST(CheckSp, IdentityHoldsOnSimulatedExcursions) {
    std::size_t passed = 0;
    for (const PathBundle& b : paths(10, 13)) {
        const auto y = b.y();
        for (const Excursion& e : excursions(b.times, b.z, 5e-2).intervals) {
            if (!e.complete()) continue;
            const SPReport r = check_sp(b.z, y, b.x, kRef, e.g_index, e.d_index, 1e-9);
            if (!r.pass) continue;
            ++passed;
            EXPECT_LE(r.variation_identity_residual, 1e-9);
        }
    }
    EXPECT_GT(passed, 100u);
}

TEST(CheckSp, TotalVariationKeepsGrowingOverHorizon) {
    const std::size_t strides[] = {64, 32, 16, 8, 4, 2, 1};
    std::vector<std::vector<double>> v1(std::size(strides));
    for (const PathBundle& b : paths(20, 14)) {
        const auto y = b.y();
        for (std::size_t i = 0; i < std::size(strides); ++i)
            v1[i].push_back(strong_p_variation(subsample(std::span<const Vec2>(y), strides[i]), 1.0));
    }
    std::vector<double> med;
    for (auto& v : v1) med.push_back(stats::median(v));
    for (std::size_t i = 1; i < med.size(); ++i) EXPECT_GT(med[i], 1.05 * med[i - 1]) << i;
    EXPECT_GT(med.back(), 2.0 * med.front());
}

TEST(CheckEsp, ZeroConeIsStructuralFailure) {
    const Triple t = interior_only();
    const ESPReport r = check_esp(t.z, t.y, t.x, kRef, VertexCone::zero(), 1e-9);
    EXPECT_TRUE(r.structural_failure);
    EXPECT_FALSE(r.pass);
}

TEST(CheckEsp, InteriorOnlyPasses) {
    const Triple t = interior_only();
    const ESPReport r = check_esp(t.z, t.y, t.x, kRef, VertexCone::bisector(kRef), 1e-9);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.hull_violations, 0u);
    EXPECT_EQ(r.vacuous_pairs, 0u);
    EXPECT_EQ(r.worst_hull_distance, 0.0);
}

TEST(CheckEsp, WrongDirectionOnEdgeIsViolation) {
    const Triple t = riding_edge1(-1.0);
    const ESPReport r = check_esp(t.z, t.y, t.x, kRef, VertexCone::bisector(kRef), 1e-9);
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.hull_violations, 0u);
}

TEST(CheckEsp, SpikeCounted) {
    Triple t = riding_edge1(1.0);
    for (std::size_t k = 10; k < t.y.size(); ++k) {
        t.y[k] = t.y[k] + 5.0 * kRef.v1;
        t.x[k] = t.z[k] - t.y[k];
    }
    const ESPReport r = check_esp(t.z, t.y, t.x, kRef, VertexCone::bisector(kRef), 1e-9);
    EXPECT_EQ(r.spikes, 1u);
    EXPECT_FALSE(r.pass);
}

TEST(CheckEsp, VertexStepCountsBothEdges) {
    // A single step into the vertex whose increment is outside the bisector ray.
    Triple t = interior_only();
    t.z[5] = {};
    for (std::size_t k = 5; k < t.z.size(); ++k) {
        t.y[k] = Vec2{-0.5, 0.3};
        t.z[k] = k == 5 ? Vec2{} : t.z[k];
        t.x[k] = t.z[k] - t.y[k];
    }
    const ESPReport r = check_esp(t.z, t.y, t.x, kRef, VertexCone::bisector(kRef), 1e-9);
    EXPECT_EQ(r.vertex_visits, 1u);
    EXPECT_EQ(r.literal_vertex_violations, 1u);
    EXPECT_EQ(r.hull_violations, 0u);
    EXPECT_TRUE(r.pass);
}

TEST(CheckEsp, SimulatedPathsPassWithBisector) {
    for (const PathBundle& b : paths(5, 15)) {
        const auto y = b.y();
        const ESPReport r = check_esp(b.z, y, b.x, kRef, VertexCone::bisector(kRef), 1e-9);
        EXPECT_TRUE(r.pass) << r.hull_violations << ' ' << r.worst_hull_distance;
        EXPECT_GT(r.vertex_visits, 0u);
        EXPECT_GT(r.edge1_visits, 0u);
        EXPECT_GT(r.edge2_visits, 0u);
    }
}

TEST(CheckEsp, WeakerThanSp) {
    const PathBundle b = paths(1, 16).front();
    const auto y = b.y();
    std::size_t compared = 0;
    for (const Excursion& e : excursions(b.times, b.z, 5e-2).intervals) {
        if (!e.complete()) continue;
        const SPReport sp = check_sp(b.z, y, b.x, kRef, e.g_index, e.d_index, 1e-9);
        if (!sp.pass) continue;
        const std::size_t len = sp.end - sp.start + 1;
        const ESPReport esp = check_esp(std::span<const Vec2>(b.z).subspan(sp.start, len),
                                        std::span<const Vec2>(y).subspan(sp.start, len),
                                        std::span<const Vec2>(b.x).subspan(sp.start, len), kRef,
                                        VertexCone::bisector(kRef), 1e-9);
        EXPECT_TRUE(esp.pass) << e.g_index;
        ++compared;
    }
    EXPECT_GT(compared, 5u);
}

TEST(Reports, JsonlRecordsParse) {
    const Triple t = riding_edge1(1.0);
    std::ostringstream os;
    write_sp_jsonl(os, 3, 7, check_sp(t.z, t.y, t.x, kRef, 0, 19, 1e-9));
    write_esp_jsonl(os, 3, check_esp(t.z, t.y, t.x, kRef, VertexCone::bisector(kRef), 1e-9));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    const auto sp = nlohmann::json::parse(line);
    EXPECT_EQ(sp["path_id"], 3);
    EXPECT_EQ(sp["excursion"], 7);
    EXPECT_EQ(sp["pass"], true);
    EXPECT_TRUE(sp.contains("variation_identity_residual"));
    std::getline(is, line);
    const auto esp = nlohmann::json::parse(line);
    EXPECT_EQ(esp["structural_failure"], false);
    EXPECT_EQ(esp["hull_violations"], 0);
    EXPECT_TRUE(esp.contains("literal_vertex_violations"));
}
