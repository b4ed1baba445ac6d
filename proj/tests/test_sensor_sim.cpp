#include "gpsdefense/sensor_sim.hpp"
#include "gpsdefense/trajectory_gen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace gpsdefense;

namespace {

Trajectory parse(const std::string& text, double dt = 0.1) {
    std::istringstream in(text);
    return parse_trajectory(in, dt);
}

Trajectory straight(std::size_t n, double speed, double dt = 0.1) {
    Trajectory t;
    t.dt = dt;
    for (std::size_t k = 0; k < n; ++k)
        t.samples.push_back({k * dt, {speed * k * dt, 0.0, 0.0, speed}});
    return t;
}

double stddev(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(LoadTrajectory, TwoRowFile) {
    const auto t = parse("t,x,y,heading,speed\n0,0,0,0,10\n0.1,1,0,0,10\n");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_DOUBLE_EQ(t.samples[1].state.px, 1.0);
    EXPECT_DOUBLE_EQ(t.samples[1].state.speed, 10.0);
}

TEST(LoadTrajectory, RejectsBadHeader) {
    EXPECT_THROW(parse("time,x,y,heading,speed\n0,0,0,0,1\n0.1,0,0,0,1\n"), InvalidInput);
}

TEST(LoadTrajectory, DecreasingTimestampsReportLine) {
    try {
        parse("t,x,y,heading,speed\n0,0,0,0,10\n0.2,2,0,0,10\n0.1,1,0,0,10\n");
        FAIL() << "expected a monotonicity error";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(LoadTrajectory, MalformedRowReportsLine) {
    try {
        parse("t,x,y,heading,speed\n0,0,0,0,10\n0.1,abc,0,0,10\n");
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse("t,x,y,heading,speed\n0,0,0,0\n0.1,0,0,0,1\n"), InvalidInput);
    EXPECT_THROW(parse("t,x,y,heading,speed\n0,0,0,0,1,7\n0.1,0,0,0,1\n"), InvalidInput);
}

TEST(LoadTrajectory, FinerInputResamplesToDt) {
    // 0.05 s input onto a 0.1 s grid: the middle row is skipped, the ends kept.
    const auto t = parse("t,x,y,heading,speed\n0,0,0,0,10\n0.05,0.7,0.1,0,11\n0.1,1,0,0,12\n");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_DOUBLE_EQ(t.samples[0].state.px, 0.0);
    EXPECT_DOUBLE_EQ(t.samples[1].t, 0.1);
    EXPECT_DOUBLE_EQ(t.samples[1].state.px, 1.0);
    EXPECT_DOUBLE_EQ(t.samples[1].state.speed, 12.0);
}

TEST(LoadTrajectory, IrregularInputInterpolatesLinearly) {
    // Grid point t = 0.1 lies 1/4 of the way from 0.05 to 0.25.
    const auto t = parse("t,x,y,heading,speed\n0,0,0,0,10\n0.05,1,2,0.2,10\n0.25,5,6,0.6,14\n");
    ASSERT_EQ(t.size(), 3u);
    const auto& mid = t.samples[1].state;
    EXPECT_NEAR(mid.px, 1.0 + 0.25 * 4.0, 1e-12);
    EXPECT_NEAR(mid.py, 2.0 + 0.25 * 4.0, 1e-12);
    EXPECT_NEAR(mid.heading, 0.2 + 0.25 * 0.4, 1e-12);
    EXPECT_NEAR(mid.speed, 10.0 + 0.25 * 4.0, 1e-12);
}

TEST(LoadTrajectory, HeadingInterpolatesAcrossTheSeam) {
    const double a = std::numbers::pi - 0.1;
    std::ostringstream csv;
    csv.precision(17);
    csv << "t,x,y,heading,speed\n0,0,0," << a << ",1\n0.2,0,0," << -a << ",1\n";
    const auto t = parse(csv.str());
    ASSERT_EQ(t.size(), 3u);
    // Shortest arc passes through pi, not through 0.
    EXPECT_NEAR(std::abs(t.samples[1].state.heading), std::numbers::pi, 1e-9);
}

TEST(LoadTrajectory, WriteThenParseRoundTrips) {
    const auto orig = generate_trajectory(RoadShape::curved, 3, 0);
    std::stringstream ss;
    write_trajectory(ss, orig);
    const auto back = parse_trajectory(ss, orig.dt);
    ASSERT_EQ(back.size(), orig.size());
    for (std::size_t i = 0; i < orig.size(); i += 97) EXPECT_EQ(back.samples[i].state, orig.samples[i].state);
}

TEST(SynthesizeImu, ConstantSpeedStraightIsZero) {
    SensorNoiseConfig cfg{0.0, 0.0, 0.0, 1};
    const auto imu = synthesize_imu(straight(50, 15.0), cfg);
    ASSERT_EQ(imu.size(), 49u);
    for (const auto& u : imu) {
        EXPECT_EQ(u.accel, 0.0);
        EXPECT_EQ(u.yaw_rate, 0.0);
    }
}

TEST(SynthesizeImu, SpeedRampGivesConstantAccel) {
    Trajectory t;
    for (int k = 0; k <= 10; ++k) t.samples.push_back({k * 0.1, {0.0, 0.0, 0.0, 10.0 + 0.2 * k}});
    const auto imu = synthesize_imu(t, {0.0, 0.0, 0.0, 1});
    ASSERT_EQ(imu.size(), 10u);
    for (const auto& u : imu) EXPECT_NEAR(u.accel, 2.0, 1e-9);
}

TEST(SynthesizeImu, DeterministicPerSeed) {
    const auto traj = generate_trajectory(RoadShape::curved, 5, 1);
    SensorNoiseConfig cfg;
    cfg.seed = 99;
    EXPECT_EQ(synthesize_imu(traj, cfg), synthesize_imu(traj, cfg));
    cfg.seed = 100;
    const auto other = synthesize_imu(traj, cfg);
    cfg.seed = 99;
    EXPECT_NE(synthesize_imu(traj, cfg), other);
}

TEST(SynthesizeGps, NoiselessFixesSitOnTruthAtWholeSeconds) {
    const auto traj = generate_trajectory(RoadShape::straight, 5, 0);
    const auto gps = synthesize_gps(traj, {0.0, 0.0, 0.0, 1});
    ASSERT_FALSE(gps.empty());
    for (std::size_t i = 0; i < gps.size(); ++i) {
        const auto& s = traj.samples[(i + 1) * 10];
        EXPECT_NEAR(gps[i].t, static_cast<double>(i + 1), 1e-9);
        EXPECT_EQ(gps[i].px, s.state.px);
        EXPECT_EQ(gps[i].py, s.state.py);
        EXPECT_FALSE(gps[i].spoofed);
    }
}

TEST(SynthesizeGps, UnitSigmaSampleStd) {
    const auto traj = straight(100001, 0.0);
    const auto gps = synthesize_gps(traj, {1.0, 0.0, 0.0, 17});
    ASSERT_EQ(gps.size(), 10000u);
    std::vector<double> ex, ey;
    for (const auto& f : gps) {
        const auto& s = traj.samples[static_cast<std::size_t>(std::llround(f.t / 0.1))].state;
        ex.push_back(f.px - s.px);
        ey.push_back(f.py - s.py);
    }
    EXPECT_GE(stddev(ex), 0.97);
    EXPECT_LE(stddev(ex), 1.03);
    EXPECT_GE(stddev(ey), 0.97);
    EXPECT_LE(stddev(ey), 1.03);
}

TEST(SynthesizeGps, ShortTrajectoryHasNoFixes) {
    EXPECT_TRUE(synthesize_gps(straight(10, 5.0), {}).empty());
}

TEST(SynthesizeGps, EveryFixAlignsWithAnImuSample) {
    const auto traj = generate_trajectory(RoadShape::curved, 8, 2);
    const auto imu = synthesize_imu(traj, {});
    for (const auto& f : synthesize_gps(traj, {})) {
        const auto k = static_cast<std::size_t>(std::llround(f.t / traj.dt));
        ASSERT_LT(k, imu.size() + 1);
        if (k < imu.size()) EXPECT_NEAR(imu[k].t, f.t, 1e-9);
    }
}

TEST(SensorLoop, NoiselessDeadReckoningReproducesTruth) {
    for (auto shape : {RoadShape::straight, RoadShape::curved}) {
        const auto traj = generate_trajectory(shape, 12, 4);
        const auto imu = synthesize_imu(traj, {0.0, 0.0, 0.0, 1});
        VehicleState s = traj.samples.front().state;
        double worst = 0.0;
        for (std::size_t k = 0; k < imu.size(); ++k) {
            s = motion_step(s, imu[k], traj.dt);
            worst = std::max(worst, (s.position() - traj.samples[k + 1].state.position()).norm());
        }
        EXPECT_LT(worst, 1e-6);
    }
}

TEST(TrajectoryGenerator, RespectsConfiguredEnvelope) {
    TrajectoryGenConfig cfg;
    const auto set = generate_trajectory_set(10, 42, cfg);
    ASSERT_EQ(set.size(), 10u);
    for (const auto& t : set) {
        EXPECT_NO_THROW(t.validate());
        EXPECT_GE(t.duration(), cfg.min_duration - 1e-9);
        EXPECT_LE(t.duration(), cfg.max_duration + 1e-9);
        for (const auto& s : t.samples) {
            EXPECT_GE(s.state.speed, cfg.min_speed - cfg.max_accel * cfg.dt - 1e-9);
            EXPECT_LE(s.state.speed, cfg.max_speed + cfg.max_accel * cfg.dt + 1e-9);
        }
    }
    // Straight trips never turn.
    const auto& st = set[0];
    EXPECT_EQ(st.samples.front().state.heading, st.samples.back().state.heading);
}
