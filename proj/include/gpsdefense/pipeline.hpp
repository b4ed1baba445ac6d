// Per-trip defense pipeline: EKF propagation on IMU samples, feature
// generation and detection at GPS epochs, GPS isolation, and RSU-based
// correction of the EKF, either when an RSU fix arrives (case a) or at the
// moment an attack is first detected (case b).
#pragma once

#include "gpsdefense/core.hpp"
#include "gpsdefense/detectors.hpp"
#include "gpsdefense/iforest.hpp"
#include "gpsdefense/rsu.hpp"
#include "gpsdefense/state_estimation.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace gpsdefense {

using Event = std::variant<ImuSample, GpsFix, RsuFix>;

/// Where the predictor's heading/speed variances come from when it is anchored.
enum class AnchorVariance { config, ekf };

struct PipelineConfig {
    EkfConfig ekf;
    AnchorConfig anchor;
    AnchorVariance anchor_variance = AnchorVariance::ekf;
    DetectorId gating = DetectorId::iforest;
    bool rsu_correction = true;
    std::size_t reinstate_after = 3;
    double chi2_dof = 2.0;
    double chi2_confidence = 0.95;
    CusumParams cusum;
    std::shared_ptr<const IsolationForest> forest;
    std::size_t window = 3;
    // Added to H P_rsu H' in s_rsu. Defaults to R_gps when unset.
    std::optional<Mat2> rsu_feature_cov;
    bool latency_compensation = true;
    double history_seconds = 5.0;
};

struct EpochRecord {
    double t = 0.0;
    FeatureVector features;
    DetectorVerdict iforest, chi2, cusum;
    DetectorVerdict gate;     // verdict of the gating detector
    Vec2 estimate{0.0, 0.0};  // after processing the fix
    bool spoofed = false;
    bool isolated = false;    // after processing the fix
    bool fused = false;
    bool corrected = false;   // case (b) fired on this epoch

    const DetectorVerdict& verdict(DetectorId d) const {
        switch (d) {
            case DetectorId::iforest: return iforest;
            case DetectorId::chi2: return chi2;
            case DetectorId::cusum: return cusum;
            case DetectorId::none: break;
        }
        return gate;
    }
};

struct TrackPoint {
    double t = 0.0;
    Vec2 estimate{0.0, 0.0};
};

/// GPS isolation bookkeeping.
struct IsolationState {
    bool isolated = false;
    std::size_t benign_streak = 0;
    bool anchored_while_isolated = false;
};

/// Whether isolated GPS returns on this verdict: after `required` consecutive
/// benign verdicts, or on the first benign verdict following an RSU anchor.
inline bool reinstate_policy(IsolationState& s, const DetectorVerdict& v, std::size_t required) {
    if (!s.isolated) return true;
    if (v.attack()) {
        s.benign_streak = 0;
        s.anchored_while_isolated = false;
        return false;
    }
    ++s.benign_streak;
    return s.benign_streak >= required || s.anchored_while_isolated;
}

class Pipeline {
public:
    Pipeline(PipelineConfig cfg, const Estimate& initial, double t0)
        : cfg_(std::move(cfg)), ekf_(initial), state_time_(t0), last_event_time_(t0),
          window_(cfg_.forest ? cfg_.forest->window() : cfg_.window) {
        cfg_.ekf.validate();
        if (cfg_.gating == DetectorId::iforest && !cfg_.forest)
            throw ConfigError("pipeline: iforest gating requires a trained forest");
        if (cfg_.forest && cfg_.forest->dim() != 3 * window_.width())
            throw ConfigError("pipeline: forest dimension does not match the feature window");
        if (cfg_.reinstate_after == 0) throw ConfigError("pipeline: reinstate_after must be >= 1");
        if (!is_valid_covariance(initial.cov))
            throw InvalidInput("pipeline: initial covariance is not symmetric PSD");
        // The predictor starts from the (GPS-free) initialization.
        predictor_.est = initial;
        predictor_.anchored_at = t0;
        predictor_.anchored = true;
    }

    void step(const Event& ev) {
        std::visit([this](const auto& e) { handle(e); }, ev);
    }

    const Estimate& estimate() const { return ekf_; }
    const RsuPredictor& predictor() const { return predictor_; }
    bool gps_isolated() const { return iso_.isolated; }
    double state_time() const { return state_time_; }
    const std::vector<EpochRecord>& epoch_log() const { return log_; }
    const std::vector<TrackPoint>& track() const { return track_; }
    const PipelineConfig& config() const { return cfg_; }

    /// EKF state snapshot at time t (within the retained history).
    std::optional<VehicleState> state_at(double t) const {
        const double tol = 1e-6;
        if (std::abs(t - state_time_) <= tol) return ekf_.state;
        for (auto it = history_.rbegin(); it != history_.rend(); ++it)
            if (std::abs(it->u.t - t) <= tol) return it->before.state;
        return std::nullopt;
    }

    /// Append the current estimate to the RMSE track (call at the trip end).
    void finish() { track_.push_back({state_time_, ekf_.state.position()}); }

private:
    struct HistoryEntry {
        ImuSample u;
        Estimate before;
    };

    // Validates only; handlers commit the time once the event is accepted.
    void check_order(double t) const {
        if (t < last_event_time_ - 1e-9) throw InvalidInput("pipeline: out-of-order event");
    }

    void handle(const ImuSample& u) {
        check_order(u.t);
        if (std::abs(u.t - state_time_) > 1e-6)
            throw InvalidInput("pipeline: IMU sample does not start at the current state time");
        last_event_time_ = u.t;
        track_.push_back({state_time_, ekf_.state.position()});
        history_.push_back({u, ekf_});
        const auto keep = static_cast<std::size_t>(cfg_.history_seconds / cfg_.ekf.dt) + 2;
        while (history_.size() > keep) history_.pop_front();
        ekf_ = ekf_predict(ekf_, u, cfg_.ekf);
        predictor_ = predictor_step(predictor_, u, cfg_.ekf);
        state_time_ = u.t + cfg_.ekf.dt;
    }

    void handle(const RsuFix& fix) {
        check_order(fix.t_available);
        if (fix.t_available > state_time_ + 1e-6)
            throw InvalidInput("pipeline: RSU fix consumed before it is available");
        if (fix.t_available < fix.t_emitted)
            throw InvalidInput("pipeline: RSU fix available before it was emitted");
        last_event_time_ = fix.t_available;

        // Heading and speed from the vehicle's own state at emission time.
        Estimate own = ekf_;
        std::size_t replay_from = history_.size();
        for (std::size_t i = history_.size(); i-- > 0;) {
            if (history_[i].u.t < fix.t_emitted - 1e-6) break;
            if (std::abs(history_[i].u.t - fix.t_emitted) <= 1e-6) {
                own = history_[i].before;
                replay_from = i;
                break;
            }
        }
        AnchorConfig anchor = cfg_.anchor;
        if (cfg_.anchor_variance == AnchorVariance::ekf) {
            anchor.heading_var = own.cov(2, 2);
            anchor.speed_var = own.cov(3, 3);
        }
        predictor_ = predictor_anchor(fix, own.state.heading, own.state.speed, anchor);
        if (cfg_.latency_compensation)
            for (std::size_t i = replay_from; i < history_.size(); ++i)
                predictor_ = predictor_step(predictor_, history_[i].u, cfg_.ekf);

        if (cfg_.rsu_correction) ekf_ = predictor_.est;
        if (iso_.isolated) iso_.anchored_while_isolated = true;
    }

    void handle(const GpsFix& fix) {
        check_order(fix.t);
        if (std::abs(fix.t - state_time_) > 0.5 * cfg_.ekf.dt)
            throw InvalidInput("pipeline: GPS fix not aligned with the state time");
        if (!log_.empty() && !(fix.t > log_.back().t))
            throw InvalidInput("pipeline: GPS epochs must be strictly increasing");
        last_event_time_ = fix.t;

        EpochRecord rec;
        rec.t = fix.t;
        rec.spoofed = fix.spoofed;

        const Vec2 innovation = fix.position() - cfg_.ekf.H * ekf_.state.to_vector();
        rec.features.t = fix.t;
        rec.features.nees = compute_nees(innovation, ekf_.cov, cfg_.ekf);
        const auto rsu = compute_rsu_features(fix, predictor_.est,
                                              cfg_.rsu_feature_cov.value_or(cfg_.ekf.R_gps),
                                              cfg_.ekf.H);
        rec.features.r_rsu = rsu.r_rsu;
        rec.features.s_rsu = rsu.s_rsu;
        window_.push(rec.features);

        if (cfg_.forest) rec.iforest = iforest_verdict(*cfg_.forest, window_.flatten());
        else rec.iforest.detector = DetectorId::iforest;
        rec.chi2 = chi2_verdict(rec.features.nees, cfg_.chi2_dof, cfg_.chi2_confidence);
        const auto cs = cusum_step(cusum_g_, rec.features.nees, cfg_.cusum);
        cusum_g_ = cs.g;
        rec.cusum = cs.verdict;
        rec.gate = cfg_.gating == DetectorId::none ? DetectorVerdict{} : rec.verdict(cfg_.gating);

        if (!iso_.isolated) {
            if (rec.gate.attack()) {
                iso_ = {true, 0, false};
                if (cfg_.rsu_correction) {
                    ekf_ = predictor_.est;
                    rec.corrected = true;
                }
            } else {
                ekf_ = ekf_update(ekf_, fix, cfg_.ekf).posterior;
                rec.fused = true;
            }
        } else if (reinstate_policy(iso_, rec.gate, cfg_.reinstate_after)) {
            iso_ = {};
            ekf_ = ekf_update(ekf_, fix, cfg_.ekf).posterior;
            rec.fused = true;
        }
        rec.isolated = iso_.isolated;
        rec.estimate = ekf_.state.position();
        log_.push_back(rec);
    }

    PipelineConfig cfg_;
    Estimate ekf_;
    RsuPredictor predictor_;
    IsolationState iso_;
    double cusum_g_ = 0.0;
    double state_time_;
    double last_event_time_;
    FeatureWindow window_;
    std::deque<HistoryEntry> history_;
    std::vector<EpochRecord> log_;
    std::vector<TrackPoint> track_;
};

}  // namespace gpsdefense
