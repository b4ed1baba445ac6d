// Detection and localization metrics over one trip.
#pragma once

#include "gpsdefense/core.hpp"
#include "gpsdefense/detectors.hpp"
#include "gpsdefense/pipeline.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace gpsdefense {

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    // Spoofed epochs missed before the first true positive; all of them if
    // the detector never fires during the attack.
    std::size_t latency = 0;
    std::size_t spoofed = 0;
};

/// Counts verdicts against labels; `flags[i]` is detector i's attack verdict.
inline Confusion compute_confusion(const std::vector<bool>& flags, const std::vector<bool>& spoofed) {
    if (flags.size() != spoofed.size()) throw InvalidInput("compute_confusion: length mismatch");
    Confusion c;
    bool detected = false;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (spoofed[i]) {
            ++c.spoofed;
            if (flags[i]) {
                ++c.tp;
                detected = true;
            } else {
                ++c.fn;
                if (!detected) ++c.latency;
            }
        } else {
            flags[i] ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

inline Confusion compute_confusion(const std::vector<EpochRecord>& log, DetectorId detector) {
    std::vector<bool> flags, labels;
    flags.reserve(log.size());
    labels.reserve(log.size());
    for (const auto& r : log) {
        flags.push_back(r.verdict(detector).attack());
        labels.push_back(r.spoofed);
    }
    return compute_confusion(flags, labels);
}

/// Harmonic mean of precision and recall; 0 when both are 0.
inline double compute_f1(double precision, double recall) {
    if (!(precision >= 0.0 && precision <= 1.0 && recall >= 0.0 && recall <= 1.0))
        throw InvalidInput("compute_f1: precision and recall must lie in [0, 1]");
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

/// Precision is 1 with no positives on an attack-free trip, else tp/(tp+fp)
/// (0 when undefined). Recall is 1 on an attack-free trip.
inline double precision_of(const Confusion& c) {
    if (c.tp + c.fp == 0) return c.spoofed == 0 ? 1.0 : 0.0;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double recall_of(const Confusion& c) {
    if (c.spoofed == 0) return 1.0;
    return static_cast<double>(c.tp) / static_cast<double>(c.spoofed);
}

/// sqrt(mean |est - truth|^2).
inline double compute_rmse(std::span<const Vec2> estimates, std::span<const Vec2> truth) {
    if (estimates.size() != truth.size()) throw InvalidInput("compute_rmse: length mismatch");
    if (estimates.empty()) throw InvalidInput("compute_rmse: empty sequence");
    double sum = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) sum += (estimates[i] - truth[i]).squaredNorm();
    return std::sqrt(sum / static_cast<double>(estimates.size()));
}

struct TripMetrics {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double latency = 0.0;
    double rmse = 0.0;
    Confusion confusion;
};

inline TripMetrics make_metrics(const Confusion& c, double rmse) {
    TripMetrics m;
    m.confusion = c;
    m.precision = precision_of(c);
    m.recall = recall_of(c);
    m.f1 = compute_f1(m.precision, m.recall);
    m.latency = static_cast<double>(c.latency);
    m.rmse = rmse;
    return m;
}

}  // namespace gpsdefense
