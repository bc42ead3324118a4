#include <gtest/gtest.h>

#include <atomic>
#include <numbers>
#include <random>

#include "oasim/json_util.hpp"
#include "oasim/math.hpp"
#include "oasim/parallel.hpp"
#include "oasim/random.hpp"

using namespace oasim;

namespace {

Pose random_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const Quat q = Quat{u(rng), u(rng), u(rng), u(rng)}.normalized();
    return {{u(rng), u(rng), u(rng)}, q};
}

void expect_near(const Vec3& a, const Vec3& b, double tol) {
    EXPECT_NEAR(a.x, b.x, tol);
    EXPECT_NEAR(a.y, b.y, tol);
    EXPECT_NEAR(a.z, b.z, tol);
}

} // namespace

TEST(Math, YawQuarterTurnMapsXToY) {
    const Pose p = Pose::from_xyz_yaw({0, 0, 0}, std::numbers::pi / 2);
    expect_near(p.apply({1, 0, 0}), {0, 1, 0}, 1e-15);
    EXPECT_NEAR(p.yaw(), std::numbers::pi / 2, 1e-15);
}

TEST(Math, ComposeMatchesSequentialApplication) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const Pose a = random_pose(rng), b = random_pose(rng);
        const Vec3 p{1.5, -2.0, 0.25};
        expect_near(compose(a, b).apply(p), a.apply(b.apply(p)), 1e-12);
    }
}

TEST(Math, ComposeIsAssociative) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
        const Vec3 p{0.3, 4.0, -1.0};
        expect_near(compose(compose(a, b), c).apply(p), compose(a, compose(b, c)).apply(p), 1e-11);
    }
}

TEST(Math, InverseUndoesPose) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Pose a = random_pose(rng);
        const Vec3 p{-7.0, 2.0, 9.0};
        expect_near(a.inverse().apply(a.apply(p)), p, 1e-12);
    }
}

TEST(Math, SlerpEndpointsAndMidpoint) {
    const Quat a = Quat::from_yaw(0.0), b = Quat::from_yaw(1.0);
    EXPECT_NEAR(slerp(a, b, 0.0).yaw(), 0.0, 1e-15);
    EXPECT_NEAR(slerp(a, b, 1.0).yaw(), 1.0, 1e-12);
    EXPECT_NEAR(slerp(a, b, 0.5).yaw(), 0.5, 1e-12);
}

TEST(Math, WrapAngleRange) {
    EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(wrap_angle(0.25), 0.25, 0.0);
}

TEST(Math, Smoothstep) {
    EXPECT_EQ(smoothstep(0.0), 0.0);
    EXPECT_EQ(smoothstep(1.0), 1.0);
    EXPECT_EQ(smoothstep(0.5), 0.5);
}

TEST(Random, KeyedValuesDependOnlyOnKey) {
    EXPECT_EQ(hash_key({1, 2, 3}), hash_key({1, 2, 3}));
    EXPECT_NE(hash_key({1, 2, 3}), hash_key({1, 3, 2}));
    SplitMix a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Random, KeyedNormalMoments) {
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = keyed_normal(hash_key({9, static_cast<std::uint64_t>(i), 0}), hash_key({9, static_cast<std::uint64_t>(i), 1}));
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.02);
}

TEST(Parallel, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, PropagatesExceptions) {
    EXPECT_THROW(parallel_for(100, [](std::size_t i) { if (i == 37) fail("Boom", "x"); }, 3), Error);
}

TEST(Json, PoseRoundTrip) {
    const Pose p{{1, 2, 3}, Quat::from_yaw(0.3)};
    const Pose q = to_pose(pose_json(p));
    expect_near(q.translation, p.translation, 0.0);
    EXPECT_NEAR(q.yaw(), 0.3, 1e-15);
}
