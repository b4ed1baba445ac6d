// Per-epoch detection features and the three detectors: the windowed
// isolation forest, the chi-square NEES test and CUSUM on NEES.
#pragma once

#include "gpsdefense/core.hpp"
#include "gpsdefense/iforest.hpp"
#include "gpsdefense/state_estimation.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <array>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

namespace gpsdefense {

enum class DetectorId { iforest, chi2, cusum, none };

inline std::string_view to_string(DetectorId d) {
    switch (d) {
        case DetectorId::iforest: return "iforest";
        case DetectorId::chi2: return "chi2";
        case DetectorId::cusum: return "cusum";
        case DetectorId::none: return "none";
    }
    return "none";
}

inline DetectorId parse_detector(std::string_view s) {
    if (s == "iforest") return DetectorId::iforest;
    if (s == "chi2") return DetectorId::chi2;
    if (s == "cusum") return DetectorId::cusum;
    if (s == "none") return DetectorId::none;
    throw ConfigError("unknown detector '" + std::string(s) + "'");
}

struct DetectorVerdict {
    int delta = -1;      // +1 attack, -1 benign
    double score = 0.0;  // detector-specific score in [0, 1)
    DetectorId detector = DetectorId::none;

    bool attack() const { return delta > 0; }
};

/// A_k = (NEES, r_rsu, s_rsu) at GPS epoch t.
struct FeatureVector {
    double t = 0.0;
    double nees = 0.0;
    double r_rsu = 0.0;
    double s_rsu = 0.0;

    std::array<double, 3> values() const { return {nees, r_rsu, s_rsu}; }
};

/// r' S^-1 r with S = H P H' + R_gps.
inline double compute_nees(const Vec2& innovation, const Covariance& p, const EkfConfig& cfg) {
    const Mat2 s = cfg.H * p * cfg.H.transpose() + cfg.R_gps;
    const double det = s.determinant();
    if (!std::isfinite(det) || std::abs(det) <= 1e-300)
        throw NumericalError("compute_nees: singular innovation covariance");
    return std::max(0.0, innovation.dot(s.ldlt().solve(innovation)));
}

struct RsuFeatures {
    double r_rsu = 0.0;
    double s_rsu = 0.0;
};

/// Residual of the received fix against the GPS-free RSU prediction:
/// r_rsu = |z - H x_rsu|, s_rsu = det(H P_rsu H' + R).
inline RsuFeatures compute_rsu_features(const GpsFix& z, const Estimate& rsu, const Mat2& meas_cov,
                                        const Mat24& h = position_selector()) {
    RsuFeatures f;
    f.r_rsu = (z.position() - h * rsu.state.to_vector()).norm();
    f.s_rsu = (h * rsu.cov * h.transpose() + meas_cov).determinant();
    return f;
}

/// Sliding window of the last W feature vectors, flattened oldest first.
/// Until W epochs exist the earliest vector is repeated.
class FeatureWindow {
public:
    explicit FeatureWindow(std::size_t width) : width_(width) {
        if (width == 0) throw InvalidInput("feature window: width must be >= 1");
    }

    void push(const FeatureVector& a) {
        buf_.push_back(a);
        if (buf_.size() > width_) buf_.pop_front();
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(3 * width_);
        for (std::size_t i = 0; i < width_ - buf_.size(); ++i)
            for (double v : buf_.front().values()) out.push_back(v);
        for (const auto& a : buf_)
            for (double v : a.values()) out.push_back(v);
        return out;
    }

    bool empty() const { return buf_.empty(); }
    std::size_t width() const { return width_; }

private:
    std::size_t width_;
    std::deque<FeatureVector> buf_;
};

inline DetectorVerdict iforest_verdict(const IsolationForest& forest, std::span<const double> window) {
    DetectorVerdict v;
    v.detector = DetectorId::iforest;
    v.score = forest.score(window);
    v.delta = forest.is_anomaly(v.score) ? 1 : -1;
    return v;
}

/// chi^2 inverse CDF at `confidence` with `dof` degrees of freedom.
inline double chi2_threshold(double dof = 2.0, double confidence = 0.95) {
    if (!(dof > 0.0) || !(confidence > 0.0 && confidence < 1.0))
        throw InvalidInput("chi2_threshold: bad parameters");
    return boost::math::quantile(boost::math::chi_squared(dof), confidence);
}

/// Flags when NEES exceeds the chi^2 quantile. The score is the chi^2 CDF.
inline DetectorVerdict chi2_verdict(double nees, double dof = 2.0, double confidence = 0.95) {
    if (!(nees >= 0.0)) throw InvalidInput("chi2_verdict: nees must be >= 0");
    DetectorVerdict v;
    v.detector = DetectorId::chi2;
    v.score = boost::math::cdf(boost::math::chi_squared(dof), nees);
    v.delta = nees > chi2_threshold(dof, confidence) ? 1 : -1;
    return v;
}

struct CusumParams {
    double drift = 3.0;      // b
    double threshold = 10.0; // tau
};

struct CusumResult {
    double g = 0.0;
    DetectorVerdict verdict;
};

/// g' = max(0, g + nees - b); alarm when g' > tau, after which g' resets.
/// The score g'/(g'+tau) crosses 1/2 exactly at the alarm boundary.
inline CusumResult cusum_step(double g, double nees, const CusumParams& p) {
    if (!(g >= 0.0)) throw InvalidInput("cusum_step: g must be >= 0");
    CusumResult r;
    const double next = std::max(0.0, g + nees - p.drift);
    r.verdict.detector = DetectorId::cusum;
    r.verdict.score = next + p.threshold > 0.0 ? next / (next + p.threshold) : 0.0;
    r.verdict.delta = next > p.threshold ? 1 : -1;
    r.g = r.verdict.attack() ? 0.0 : next;
    return r;
}

}  // namespace gpsdefense
