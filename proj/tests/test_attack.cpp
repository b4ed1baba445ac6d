#include "gpsdefense/attack.hpp"
#include "gpsdefense/trajectory_gen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gpsdefense;

namespace {

AttackSchedule window(AttackKind kind, double ts, double te) {
    AttackSchedule s;
    s.kind = kind;
    s.t_start = ts;
    s.t_end = te;
    return s;
}

GpsFix fix_at(double t, double x, double y) {
    GpsFix f;
    f.t = t;
    f.px = x;
    f.py = y;
    return f;
}

}  // namespace

TEST(ApplyAttack, ConstantBiasAddsOffset) {
    auto s = window(AttackKind::constant_bias, 10.0, 20.0);
    s.bias = {4.0, 0.0};
    Attacker a(s);
    const auto out = a.apply(fix_at(15.0, 100.0, 200.0));
    EXPECT_DOUBLE_EQ(out.px, 104.0);
    EXPECT_DOUBLE_EQ(out.py, 200.0);
    EXPECT_TRUE(out.spoofed);
}

TEST(ApplyAttack, OutsideWindowIsIdentity) {
    auto s = window(AttackKind::constant_bias, 10.0, 20.0);
    s.bias = {4.0, -3.0};
    Attacker a(s);
    for (double t : {0.0, 9.0, 21.0, 50.0}) {
        auto in = fix_at(t, 1.5, -2.5);
        in.spoofed = true;
        const auto out = a.apply(in);
        EXPECT_EQ(out.px, 1.5);
        EXPECT_EQ(out.py, -2.5);
        EXPECT_FALSE(out.spoofed);
    }
}

TEST(ApplyAttack, WindowIsClosed) {
    auto s = window(AttackKind::constant_bias, 10.0, 20.0);
    s.bias = {1.0, 0.0};
    Attacker a(s);
    EXPECT_TRUE(a.apply(fix_at(10.0, 0, 0)).spoofed);
    EXPECT_TRUE(a.apply(fix_at(20.0, 0, 0)).spoofed);
}

TEST(ApplyAttack, StealthyFirstOffsetIsM) {
    auto s = window(AttackKind::stealthy, 0.0, 100.0);
    s.m = 0.7;
    s.n = 1.1;
    s.direction = {0.6, 0.8};
    Attacker a(s);
    const auto out = a.apply(fix_at(1.0, 0.0, 0.0));
    EXPECT_NEAR(std::hypot(out.px, out.py), 0.7, 1e-12);
    EXPECT_NEAR(out.px, 0.42, 1e-12);
}

TEST(ApplyAttack, StealthyTwentiethOffset) {
    auto s = window(AttackKind::stealthy, 0.0, 100.0);
    Attacker a(s);
    GpsFix out;
    for (int j = 0; j <= 20; ++j) out = a.apply(fix_at(1.0 + j, 0.0, 0.0));
    EXPECT_NEAR(std::hypot(out.px, out.py), std::pow(1.07, 20), 1e-12);
    EXPECT_NEAR(std::hypot(out.px, out.py), 3.87, 5e-3);
}

TEST(ApplyAttack, StealthyOffsetsStrictlyIncrease) {
    auto s = window(AttackKind::stealthy, 5.0, 40.0);
    s.direction = lateral_unit(0.3);
    Attacker a(s);
    double prev = 0.0;
    for (int t = 5; t <= 40; ++t) {
        const auto out = a.apply(fix_at(t, 10.0, 10.0));
        const double mag = std::hypot(out.px - 10.0, out.py - 10.0);
        EXPECT_GT(mag, prev);
        prev = mag;
    }
}

TEST(ApplyAttack, CounterOnlyAdvancesOnAttackedFixes) {
    auto s = window(AttackKind::stealthy, 10.0, 100.0);
    s.m = 2.0;
    s.n = 1.5;
    Attacker a(s);
    for (int t = 0; t < 10; ++t) a.apply(fix_at(t, 0, 0));
    EXPECT_NEAR(a.apply(fix_at(10.0, 0, 0)).px, 2.0, 1e-12);
    EXPECT_NEAR(a.apply(fix_at(11.0, 0, 0)).px, 3.0, 1e-12);
}

TEST(ApplyAttack, InvalidSchedulesRejected) {
    EXPECT_THROW(Attacker(window(AttackKind::constant_bias, 5.0, 5.0)), InvalidInput);
    auto s = window(AttackKind::stealthy, 0.0, 1.0);
    s.n = 1.0;
    EXPECT_THROW(Attacker{s}, InvalidInput);
    s.n = 1.07;
    s.direction = {1.0, 1.0};
    EXPECT_THROW(Attacker{s}, InvalidInput);
    EXPECT_NO_THROW(Attacker(window(AttackKind::none, 0.0, 0.0)));
}

TEST(RandomSchedule, DurationAndBoundsHoldForManySeeds) {
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        Rng rng(seed);
        const auto s = random_schedule(rng, AttackKind::constant_bias, 100.0);
        const double d = s.t_end - s.t_start;
        EXPECT_GE(d, 5.0);
        EXPECT_LE(d, 35.0);
        EXPECT_GE(s.t_start, 0.0);
        EXPECT_LE(s.t_end, 100.0 + 1e-9);
    }
}

TEST(RandomSchedule, ShortTripRejected) {
    Rng rng(1);
    EXPECT_THROW(random_schedule(rng, AttackKind::stealthy, 10.0), InvalidInput);
    EXPECT_THROW(random_schedule(rng, AttackKind::stealthy, 40.0), InvalidInput);
}

TEST(RandomSchedule, SameSeedSameSchedule) {
    Rng a(77), b(77);
    const auto sa = random_schedule(a, AttackKind::stealthy, 250.0);
    const auto sb = random_schedule(b, AttackKind::stealthy, 250.0);
    EXPECT_EQ(sa.t_start, sb.t_start);
    EXPECT_EQ(sa.t_end, sb.t_end);
}

TEST(OrientSchedule, BiasFollowsRoadHeadingAtOnset) {
    Trajectory t;
    const double h = std::numbers::pi / 2;  // driving north
    for (int k = 0; k <= 600; ++k) t.samples.push_back({k * 0.1, {0.0, k * 1.0, h, 10.0}});
    AttackParams p;
    p.bias_road = {4.0, 0.0};
    auto s = window(AttackKind::constant_bias, 10.0, 20.0);
    s = orient_schedule(s, t, p);
    // Lateral to a northbound road is west.
    EXPECT_NEAR(s.bias.x(), -4.0, 1e-12);
    EXPECT_NEAR(s.bias.y(), 0.0, 1e-12);
    EXPECT_NEAR(s.direction.norm(), 1.0, 1e-12);
    EXPECT_NEAR(s.direction.dot(Vec2{0.0, 1.0}), 0.0, 1e-12);

    p.bias_road = {0.0, 2.0};
    s = orient_schedule(window(AttackKind::constant_bias, 10.0, 20.0), t, p);
    EXPECT_NEAR(s.bias.y(), 2.0, 1e-12);
}

TEST(OrientSchedule, TimesShiftByTrajectoryStart) {
    Trajectory t;
    for (int k = 0; k <= 600; ++k) t.samples.push_back({100.0 + k * 0.1, {k * 1.0, 0.0, 0.0, 10.0}});
    const auto s = orient_schedule(window(AttackKind::stealthy, 5.0, 15.0), t);
    EXPECT_DOUBLE_EQ(s.t_start, 105.0);
    EXPECT_DOUBLE_EQ(s.t_end, 115.0);
}
