#include "gpsdefense/metrics.hpp"

#include <gtest/gtest.h>

using namespace gpsdefense;

TEST(F1, TableExample) {
    EXPECT_NEAR(compute_f1(0.77, 0.99), 0.866, 5e-4);
    EXPECT_EQ(compute_f1(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(compute_f1(1.0, 1.0), 1.0);
    EXPECT_THROW(compute_f1(1.2, 0.5), InvalidInput);
}

TEST(Confusion, LatencyCountsMissesBeforeFirstHit) {
    std::vector<bool> flags(100, false), labels(100, false);
    for (int i = 50; i < 70; ++i) labels[i] = true;
    flags[52] = flags[60] = true;
    flags[10] = true;
    const auto c = compute_confusion(flags, labels);
    EXPECT_EQ(c.latency, 2u);
    EXPECT_EQ(c.tp, 2u);
    EXPECT_EQ(c.fn, 18u);
    EXPECT_EQ(c.fp, 1u);
    EXPECT_EQ(c.tn, 79u);
    EXPECT_EQ(c.spoofed, 20u);
}

TEST(Confusion, NeverDetectedLatencyIsAttackLength) {
    std::vector<bool> flags(10, false), labels(10, false);
    labels[3] = labels[4] = labels[5] = true;
    EXPECT_EQ(compute_confusion(flags, labels).latency, 3u);
    EXPECT_THROW(compute_confusion(flags, std::vector<bool>(9)), InvalidInput);
}

TEST(Confusion, MatchesBruteForceOnRandomLogs) {
    Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<std::size_t>(rng.index(1, 300));
        std::vector<EpochRecord> log(n);
        for (auto& r : log) {
            r.spoofed = rng.uniform(0.0, 1.0) < 0.3;
            r.iforest.delta = rng.uniform(0.0, 1.0) < 0.4 ? 1 : -1;
            r.chi2.delta = rng.uniform(0.0, 1.0) < 0.1 ? 1 : -1;
        }
        for (auto d : {DetectorId::iforest, DetectorId::chi2}) {
            std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
            for (const auto& r : log) {
                const bool f = (d == DetectorId::iforest ? r.iforest : r.chi2).delta == 1;
                tp += f && r.spoofed;
                fp += f && !r.spoofed;
                fn += !f && r.spoofed;
                tn += !f && !r.spoofed;
            }
            const auto c = compute_confusion(log, d);
            EXPECT_EQ(c.tp, tp);
            EXPECT_EQ(c.fp, fp);
            EXPECT_EQ(c.fn, fn);
            EXPECT_EQ(c.tn, tn);
        }
    }
}

TEST(Rates, EdgeCases) {
    Confusion benign;
    benign.tn = 10;
    EXPECT_EQ(precision_of(benign), 1.0);
    EXPECT_EQ(recall_of(benign), 1.0);
    Confusion missed;
    missed.spoofed = missed.fn = 5;
    EXPECT_EQ(precision_of(missed), 0.0);
    EXPECT_EQ(recall_of(missed), 0.0);
    Confusion mixed{3, 1, 1, 5, 0, 4};
    EXPECT_DOUBLE_EQ(precision_of(mixed), 0.75);
    EXPECT_DOUBLE_EQ(recall_of(mixed), 0.75);
    EXPECT_DOUBLE_EQ(make_metrics(mixed, 2.0).f1, 0.75);
}

TEST(Rmse, ConstantOffsetAndErrors) {
    std::vector<Vec2> truth, est;
    for (int i = 0; i < 50; ++i) {
        truth.emplace_back(i, 2.0 * i);
        est.push_back(truth.back() + Vec2(3.0, 0.0));
    }
    EXPECT_NEAR(compute_rmse(est, truth), 3.0, 1e-12);
    EXPECT_EQ(compute_rmse(truth, truth), 0.0);
    // Mixed errors 3 and 4: sqrt((9 + 16) / 2).
    const std::vector<Vec2> a{{3.0, 0.0}, {0.0, 4.0}}, z(2, Vec2::Zero());
    EXPECT_NEAR(compute_rmse(a, z), std::sqrt(12.5), 1e-12);
    EXPECT_THROW(compute_rmse(std::span(a).first(1), z), InvalidInput);
    EXPECT_THROW(compute_rmse(std::span<const Vec2>{}, std::span<const Vec2>{}), InvalidInput);
}
