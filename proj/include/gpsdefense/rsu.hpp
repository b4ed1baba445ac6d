// Roadside units: placement along the road, range synthesis, single-RSU
// localization from a short range sequence plus odometry, the GPS-free
// location predictor, and the latency channel that delivers RSU fixes.
#pragma once

#include "gpsdefense/core.hpp"
#include "gpsdefense/rng.hpp"
#include "gpsdefense/sensor_sim.hpp"
#include "gpsdefense/state_estimation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace gpsdefense {

struct RsuSite {
    int id = 0;
    Vec2 coord{0.0, 0.0};
    double service_radius = 500.0;  // m
    double broadcast_rate = 10.0;   // Hz
    double arc = 0.0;               // arc length of the road foot point (m)
};

/// Sites every `spacing` metres of arc length starting at arc 0. A nonzero
/// `lateral_offset` moves each site off the road along the left normal.
inline std::vector<RsuSite> place_rsus(const Trajectory& traj, double spacing,
                                       double service_radius, double lateral_offset = 0.0,
                                       double broadcast_rate = 10.0) {
    if (!(spacing > 0.0)) throw InvalidInput("place_rsus: spacing must be > 0");
    if (!(service_radius > 0.0)) throw InvalidInput("place_rsus: service radius must be > 0");
    std::vector<RsuSite> sites;
    double arc = 0.0;
    double next = 0.0;
    const auto& s = traj.samples;
    auto emit = [&](const Vec2& p, const Vec2& dir) {
        RsuSite site;
        site.id = static_cast<int>(sites.size());
        site.coord = p + lateral_offset * Vec2(-dir.y(), dir.x());
        site.service_radius = service_radius;
        site.broadcast_rate = broadcast_rate;
        site.arc = next;
        sites.push_back(site);
        next = static_cast<double>(sites.size()) * spacing;
    };
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const Vec2 a = s[i].state.position();
        const Vec2 b = s[i + 1].state.position();
        const double len = (b - a).norm();
        const Vec2 dir = len > 0.0 ? Vec2((b - a) / len)
                                   : Vec2(std::cos(s[i].state.heading), std::sin(s[i].state.heading));
        while (next <= arc + len + 1e-6 * std::max(1.0, next)) {
            const double w = len > 0.0 ? std::clamp((next - arc) / len, 0.0, 1.0) : 0.0;
            emit(a + w * (b - a), dir);
        }
        arc += len;
    }
    if (sites.empty()) {
        const auto& st = s.front().state;
        emit(st.position(), Vec2(std::cos(st.heading), std::sin(st.heading)));
    }
    return sites;
}

struct RangeSample {
    double t = 0.0;
    int rsu_id = 0;
    double range = 0.0;  // m
    double snr = 0.0;    // dB
};

/// Noisy range to a site, or nothing when the vehicle is outside service range.
inline std::optional<RangeSample> sample_range(const Vec2& truth_pos, const RsuSite& site,
                                               double sigma, Rng& rng, double t = 0.0) {
    if (!(sigma > 0.0)) throw InvalidInput("sample_range: sigma must be > 0");
    const double d = (truth_pos - site.coord).norm();
    if (d > site.service_radius) return std::nullopt;
    RangeSample r;
    r.t = t;
    r.rsu_id = site.id;
    r.range = std::max(d + rng.normal(0.0, sigma), 0.01);
    r.snr = 10.0 * std::log10(r.range * r.range / (sigma * sigma));
    return r;
}

struct RsuFix {
    double t_emitted = 0.0;
    double t_available = 0.0;
    Vec2 position{0.0, 0.0};
    Mat2 cov = Mat2::Identity();
    int rsu_id = 0;
};

struct LocalizeConfig {
    double sigma = 0.25;        // range noise (m)
    double dt = 0.1;            // odometry step (s)
    double latency = 0.1;       // channel latency (s)
    int max_iterations = 50;
};

class LocalizationError : public Error {
public:
    enum class Kind { insufficient_data, no_fix };
    LocalizationError(Kind k, const std::string& what) : Error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Position at the time of the last range sample from a sequence of ranges to
/// one site. Odometry (IMU samples starting at the first range time) dead
/// reckons the displacement between samples from the prior's heading and
/// speed; Gauss-Newton with backtracking then solves
///   min_p sum_i (|p - D_i - site| - z_i)^2.
/// The prior also seeds the iteration, which selects the mirror solution on
/// the prior's side when the geometry is ambiguous.
inline RsuFix localize(std::span<const RangeSample> ranges, const RsuSite& site,
                       std::span<const ImuSample> odometry, const VehicleState& prior,
                       const LocalizeConfig& cfg) {
    using Kind = LocalizationError::Kind;
    if (ranges.size() < 3)
        throw LocalizationError(Kind::insufficient_data, "localize: need >= 3 range samples");
    const double t0 = ranges.front().t;

    // Dead-reckoned positions at each odometry step relative to the first sample.
    std::vector<Vec2> track{prior.position()};
    VehicleState s = prior;
    for (const auto& u : odometry) {
        s = motion_step(s, u, cfg.dt);
        track.push_back(s.position());
    }
    auto step_of = [&](double t) {
        const double idx = (t - t0) / cfg.dt;
        const auto k = static_cast<long>(std::llround(idx));
        if (k < 0 || static_cast<std::size_t>(k) >= track.size())
            throw LocalizationError(Kind::insufficient_data,
                                    "localize: odometry does not cover the range samples");
        return static_cast<std::size_t>(k);
    };
    const std::size_t last = step_of(ranges.back().t);
    std::vector<Vec2> back(ranges.size());  // displacement from sample i to the last sample
    for (std::size_t i = 0; i < ranges.size(); ++i) back[i] = track[last] - track[step_of(ranges[i].t)];

    auto cost = [&](const Vec2& p) {
        double c = 0.0;
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const double e = (p - back[i] - site.coord).norm() - ranges[i].range;
            c += e * e;
        }
        return c;
    };
    auto normal_eq = [&](const Vec2& p, Mat2& a, Vec2& g) {
        a.setZero();
        g.setZero();
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const Vec2 d = p - back[i] - site.coord;
            const double n = std::max(d.norm(), 1e-9);
            const Vec2 j = d / n;
            a += j * j.transpose();
            g += j * (n - ranges[i].range);
        }
    };

    Vec2 p = track[last];
    double c = cost(p);
    Mat2 a;
    Vec2 g;
    bool converged = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        normal_eq(p, a, g);
        const double damping = 1e-9 * std::max(a.trace(), 1e-12);
        const Vec2 delta = -(a + damping * Mat2::Identity()).ldlt().solve(g);
        if (!delta.allFinite()) break;
        double step = 1.0;
        Vec2 trial = p + delta;
        double trial_cost = cost(trial);
        while (trial_cost > c && step > 1e-6) {
            step *= 0.5;
            trial = p + step * delta;
            trial_cost = cost(trial);
        }
        if (trial_cost > c) {
            // No descent direction left: at a stationary point.
            converged = g.norm() <= 1e-6 * std::max(1.0, std::sqrt(c));
            break;
        }
        const double moved = (trial - p).norm();
        p = trial;
        const double prev = c;
        c = trial_cost;
        if (moved < 1e-9 || prev - c <= 1e-15 * std::max(1.0, prev)) {
            converged = true;
            break;
        }
    }
    if (!converged || !p.allFinite())
        throw LocalizationError(Kind::no_fix, "localize: Gauss-Newton did not converge");

    normal_eq(p, a, g);
    const double eps = 1e-12 * std::max(a.trace(), 1.0);
    RsuFix fix;
    fix.t_emitted = ranges.back().t;
    fix.t_available = fix.t_emitted + cfg.latency;
    fix.position = p;
    fix.cov = symmetrize(cfg.sigma * cfg.sigma * (a + eps * Mat2::Identity()).inverse());
    fix.rsu_id = site.id;
    return fix;
}

// ---------------------------------------------------------------------------
// GPS-free location predictor

struct AnchorConfig {
    double heading_var = 0.05;  // rad^2
    double speed_var = 1.0;     // (m/s)^2
};

struct RsuPredictor {
    Estimate est;
    double anchored_at = 0.0;
    bool anchored = false;
};

/// Start (or restart) the predictor at an RSU fix. Heading and speed come
/// from the vehicle's own state; their variances from `anchor`.
inline RsuPredictor predictor_anchor(const RsuFix& fix, double heading, double speed,
                                     const AnchorConfig& anchor) {
    RsuPredictor p;
    p.est.state = {fix.position.x(), fix.position.y(), wrap_angle(heading), speed};
    p.est.cov.setZero();
    p.est.cov.topLeftCorner<2, 2>() = fix.cov;
    p.est.cov(2, 2) = anchor.heading_var;
    p.est.cov(3, 3) = anchor.speed_var;
    p.anchored_at = fix.t_emitted;
    p.anchored = true;
    return p;
}

/// Dead reckoning with exactly the EKF prediction; never sees GPS.
inline RsuPredictor predictor_step(const RsuPredictor& pred, const ImuSample& u,
                                   const EkfConfig& cfg) {
    assert(pred.anchored);
    RsuPredictor out = pred;
    out.est = ekf_predict(pred.est, u, cfg);
    return out;
}

// ---------------------------------------------------------------------------
// Secure channel: serialize, encode, hold for the latency, decode.

class Codec {
public:
    virtual ~Codec() = default;
    virtual std::vector<std::byte> encode(std::span<const std::byte> plain) const = 0;
    virtual std::vector<std::byte> decode(std::span<const std::byte> wire) const = 0;
};

class IdentityCodec final : public Codec {
public:
    std::vector<std::byte> encode(std::span<const std::byte> plain) const override {
        return {plain.begin(), plain.end()};
    }
    std::vector<std::byte> decode(std::span<const std::byte> wire) const override {
        return {wire.begin(), wire.end()};
    }
};

inline std::vector<std::byte> serialize(const RsuFix& f) {
    const double fields[] = {f.t_emitted, f.t_available, f.position.x(), f.position.y(),
                             f.cov(0, 0),  f.cov(0, 1),    f.cov(1, 0),     f.cov(1, 1),
                             static_cast<double>(f.rsu_id)};
    std::vector<std::byte> out(sizeof(fields));
    std::memcpy(out.data(), fields, sizeof(fields));
    return out;
}

inline RsuFix deserialize_fix(std::span<const std::byte> bytes) {
    double fields[9];
    if (bytes.size() != sizeof(fields)) throw InvalidInput("rsu channel: bad message size");
    std::memcpy(fields, bytes.data(), sizeof(fields));
    RsuFix f;
    f.t_emitted = fields[0];
    f.t_available = fields[1];
    f.position = {fields[2], fields[3]};
    f.cov << fields[4], fields[5], fields[6], fields[7];
    f.rsu_id = static_cast<int>(fields[8]);
    return f;
}

class LatencyChannel {
public:
    explicit LatencyChannel(double latency, std::shared_ptr<const Codec> codec = nullptr)
        : latency_(latency), codec_(codec ? std::move(codec) : std::make_shared<IdentityCodec>()) {
        if (!(latency >= 0.0)) throw ConfigError("rsu channel: latency must be >= 0");
    }

    void send(RsuFix fix) {
        fix.t_available = fix.t_emitted + latency_;
        in_flight_.push_back({fix.t_available, codec_->encode(serialize(fix))});
    }

    /// Fixes whose availability time has been reached, in send order.
    std::vector<RsuFix> deliver(double now) {
        std::vector<RsuFix> out;
        while (!in_flight_.empty() && in_flight_.front().available <= now + 1e-9) {
            out.push_back(deserialize_fix(codec_->decode(in_flight_.front().wire)));
            in_flight_.pop_front();
        }
        return out;
    }

    double latency() const { return latency_; }
    std::size_t pending() const { return in_flight_.size(); }

private:
    struct Message {
        double available;
        std::vector<std::byte> wire;
    };
    double latency_;
    std::shared_ptr<const Codec> codec_;
    std::deque<Message> in_flight_;
};

}  // namespace gpsdefense
