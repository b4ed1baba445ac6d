// GPS spoofing models: a constant bias added over the attack window, and
// the stealthy attack whose offset grows geometrically, c_j = m * n^j.
#pragma once

#include "gpsdefense/core.hpp"
#include "gpsdefense/rng.hpp"
#include "gpsdefense/sensor_sim.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <utility>

namespace gpsdefense {

enum class AttackKind { none, constant_bias, stealthy };

inline std::string_view to_string(AttackKind k) {
    switch (k) {
        case AttackKind::none: return "none";
        case AttackKind::constant_bias: return "constant_bias";
        case AttackKind::stealthy: return "stealthy";
    }
    return "none";
}

inline AttackKind parse_attack_kind(std::string_view s) {
    if (s == "none") return AttackKind::none;
    if (s == "constant_bias") return AttackKind::constant_bias;
    if (s == "stealthy") return AttackKind::stealthy;
    throw ConfigError("unknown attack kind '" + std::string(s) + "'");
}

/// Scenario-level attack parameters; the road frame is (lateral, longitudinal).
struct AttackParams {
    Vec2 bias_road{4.0, 0.0};  // m
    double m = 1.0;
    double n = 1.07;
};

struct AttackSchedule {
    AttackKind kind = AttackKind::none;
    double t_start = 0.0;
    double t_end = 0.0;
    Vec2 bias{0.0, 0.0};         // constant_bias, world frame (m)
    double m = 1.0;              // stealthy initial magnitude (m)
    double n = 1.07;             // stealthy growth base
    Vec2 direction{1.0, 0.0};    // stealthy unit direction, world frame

    void validate() const {
        if (kind == AttackKind::none) return;
        if (!(t_start < t_end)) throw InvalidInput("attack: t_start must precede t_end");
        if (kind == AttackKind::stealthy) {
            if (!(n > 1.0)) throw InvalidInput("attack: n must be > 1");
            if (!(m > 0.0)) throw InvalidInput("attack: m must be > 0");
            if (std::abs(direction.norm() - 1.0) > 1e-9)
                throw InvalidInput("attack: direction must be a unit vector");
        }
    }

    bool active_at(double t) const {
        return kind != AttackKind::none && t >= t_start && t <= t_end;
    }
};

/// Offset added to the j-th attacked fix (j = 0 at the first one).
inline Vec2 attack_offset(const AttackSchedule& s, std::size_t j) {
    switch (s.kind) {
        case AttackKind::constant_bias: return s.bias;
        case AttackKind::stealthy:
            return s.m * std::pow(s.n, static_cast<double>(j)) * s.direction;
        case AttackKind::none: break;
    }
    return Vec2::Zero();
}

/// Applies a schedule to a fix stream, counting attacked epochs since onset.
class Attacker {
public:
    explicit Attacker(AttackSchedule s) : sched_(std::move(s)) { sched_.validate(); }

    GpsFix apply(GpsFix fix) {
        fix.spoofed = false;
        if (!sched_.active_at(fix.t)) return fix;
        const Vec2 off = attack_offset(sched_, attacked_);
        ++attacked_;
        fix.px += off.x();
        fix.py += off.y();
        fix.spoofed = true;
        return fix;
    }

    const AttackSchedule& schedule() const { return sched_; }

private:
    AttackSchedule sched_;
    std::size_t attacked_ = 0;
};

/// Attack start and duration drawn uniformly; duration ~ U(5, 35) s.
inline AttackSchedule random_schedule(Rng& rng, AttackKind kind, double trip_duration,
                                      const AttackParams& params = {}) {
    if (!(trip_duration > 40.0))
        throw InvalidInput("random_schedule: trip must be longer than 40 s");
    AttackSchedule s;
    s.kind = kind;
    const double duration = rng.uniform(5.0, 35.0);
    s.t_start = rng.uniform(0.0, trip_duration - duration);
    s.t_end = s.t_start + duration;
    s.bias = params.bias_road;
    s.m = params.m;
    s.n = params.n;
    return s;
}

/// Left-hand normal of the road at heading h.
inline Vec2 lateral_unit(double heading) { return {-std::sin(heading), std::cos(heading)}; }

/// Fix the world-frame direction at onset: constant bias rotates from the
/// road frame, stealthy deviation points laterally. Times are trip-relative.
inline AttackSchedule orient_schedule(AttackSchedule s, const Trajectory& traj,
                                      const AttackParams& params = {}) {
    const double t_abs = traj.start_time() + s.t_start;
    std::size_t k = 0;
    while (k + 1 < traj.size() && traj.samples[k].t < t_abs) ++k;
    const double h = traj.samples[k].state.heading;
    const Vec2 lat = lateral_unit(h);
    const Vec2 lon{std::cos(h), std::sin(h)};
    s.bias = params.bias_road.x() * lat + params.bias_road.y() * lon;
    s.direction = lat;
    s.t_start += traj.start_time();
    s.t_end += traj.start_time();
    return s;
}

}  // namespace gpsdefense
