#include "gpsdefense/harness.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace gpsdefense;

namespace {

ScenarioConfig small() {
    ScenarioConfig c;
    c.synthetic_trips = 3;
    c.repetitions = 2;
    c.training_trips = 3;
    c.trees = 20;
    return c;
}

TripReport trip_with(DetectorId d, double f1, double latency, std::size_t spoofed) {
    TripReport t;
    TripMetrics m;
    m.f1 = f1;
    m.latency = latency;
    m.confusion.spoofed = spoofed;
    t.metrics[d] = m;
    return t;
}

}  // namespace

TEST(Harness, BuildTripIsSeeded) {
    const auto c = small();
    const auto traj = evaluation_trajectories(c).front();
    const auto a = build_trip(traj, c, 4, AttackKind::constant_bias);
    const auto b = build_trip(traj, c, 4, AttackKind::constant_bias);
    EXPECT_EQ(a.imu, b.imu);
    EXPECT_EQ(a.schedule.t_start, b.schedule.t_start);
    const auto other = build_trip(traj, c, 5, AttackKind::constant_bias);
    EXPECT_NE(a.schedule.t_start, other.schedule.t_start);
    // Attack only touches fixes inside its window.
    for (const auto& f : a.gps) EXPECT_EQ(f.spoofed, a.schedule.active_at(f.t));
    EXPECT_NEAR(a.schedule.bias.norm(), 4.0, 1e-12);
}

TEST(Harness, RangesComeFromSitesInService) {
    const auto c = small();
    const auto traj = evaluation_trajectories(c).front();
    const auto in = build_trip(traj, c, 2, AttackKind::none);
    std::size_t n = 0;
    for (std::size_t k = 0; k < in.ranges.size(); ++k) {
        if (!in.ranges[k]) continue;
        ++n;
        const auto& s = in.sites[static_cast<std::size_t>(in.ranges[k]->rsu_id)];
        const double d = (traj->samples[k].state.position() - s.coord).norm();
        EXPECT_LE(d, s.service_radius);
        EXPECT_NEAR(in.ranges[k]->range, d, 2.0);
    }
    EXPECT_GT(n, 0u);
}

TEST(Harness, AggregateAveragesLatencyOverAttackedTrips) {
    std::vector<TripReport> trips{trip_with(DetectorId::chi2, 1.0, 0.0, 0),
                                  trip_with(DetectorId::chi2, 0.5, 4.0, 10),
                                  trip_with(DetectorId::chi2, 0.0, 2.0, 5)};
    trips.push_back(trip_with(DetectorId::chi2, 0.0, 100.0, 5));
    trips.back().ok = false;
    const auto m = aggregate(trips, DetectorId::chi2);
    EXPECT_EQ(m.trips, 3u);
    EXPECT_DOUBLE_EQ(m.f1, 0.5);
    EXPECT_DOUBLE_EQ(m.latency, 3.0);
}

TEST(Harness, BatchIsIndependentOfWorkerCount) {
    auto c = small();
    c.workers = 1;
    const auto forest = std::make_shared<const IsolationForest>(train_forest(c));
    EXPECT_EQ(forest->dim(), 9u);
    const auto a = run_batch(c, forest);
    c.workers = 4;
    const auto b = run_batch(c, forest);
    EXPECT_EQ(a.failures, 0u);
    EXPECT_EQ(report_json(a, c).dump(), report_json(b, c).dump());
    EXPECT_EQ(a.trips.size(), 6u);
    EXPECT_EQ(a.means.size(), 3u);
    const auto j = report_json(a, c);
    EXPECT_TRUE(j["means"].contains("iforest"));
    EXPECT_EQ(j["trips"].size(), 6u);
    EXPECT_TRUE(j["trips"][0]["metrics"]["chi2"].contains("rsu_fixes"));
}

TEST(Harness, BatchWithoutForestSkipsIforest) {
    auto c = small();
    c.synthetic_trips = 1;
    c.repetitions = 1;
    const auto rep = run_batch(c, nullptr);
    EXPECT_FALSE(rep.means.count(DetectorId::iforest));
    EXPECT_TRUE(rep.means.count(DetectorId::chi2));
    BatchOptions only;
    only.detectors = {DetectorId::iforest};
    EXPECT_THROW(run_batch(c, nullptr, only), ConfigError);
}

TEST(Harness, AttackPastTripEndLeavesEpochsBenign) {
    auto c = small();
    c.synthetic_trips = 1;
    c.repetitions = 1;
    c.attack = AttackKind::stealthy;
    c.random_schedule = false;
    c.t_start = 1e6;
    c.t_end = 2e6;
    const auto rep = run_batch(c, nullptr);
    EXPECT_EQ(rep.failures, 0u);
    for (const auto& t : rep.trips) EXPECT_EQ(t.metrics.at(DetectorId::chi2).confusion.spoofed, 0u);
}

TEST(Harness, SweepCsvLayout) {
    auto c = small();
    c.synthetic_trips = 1;
    c.repetitions = 1;
    BatchOptions opt;
    opt.detectors = {DetectorId::chi2};
    const auto pts = run_sweep(c, SweepAxis::sigma_rsu, {0.1, 0.5}, opt);
    ASSERT_EQ(pts.size(), 2u);
    std::ostringstream out;
    write_sweep_csv(out, SweepAxis::sigma_rsu, pts);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "axis,value,detector,metric,mean");
    std::getline(in, line);
    EXPECT_EQ(line.rfind("sigma_rsu,0.1,chi2,f1,", 0), 0u);
    std::size_t rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 10u);
    EXPECT_THROW(parse_sweep_axis("speed"), ConfigError);
    EXPECT_EQ(parse_sweep_axis("D_RSU"), SweepAxis::rsu_spacing);
    EXPECT_THROW(with_axis(c, SweepAxis::alpha, 1.0), ConfigError);
}
