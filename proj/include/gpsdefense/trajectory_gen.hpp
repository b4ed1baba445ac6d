// Synthetic road trajectories: piecewise constant acceleration and yaw
// rate, integrated with the same motion model the EKF uses so that noiseless
// sensors reproduce the truth exactly.
#pragma once

#include "gpsdefense/rng.hpp"
#include "gpsdefense/sensor_sim.hpp"
#include "gpsdefense/state_estimation.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace gpsdefense {

enum class RoadShape { straight, curved };

struct TrajectoryGenConfig {
    double dt = 0.1;
    double min_duration = 60.0;
    double max_duration = 300.0;
    double min_speed = 10.0;
    double max_speed = 30.0;
    double max_accel = 1.0;        // m/s^2
    double max_lateral_accel = 1.5;  // m/s^2, bounds the yaw rate on curves
    double min_segment = 5.0;
    double max_segment = 30.0;
};

inline Trajectory generate_trajectory(RoadShape shape, std::uint64_t seed, std::uint64_t index,
                                      const TrajectoryGenConfig& cfg = {}) {
    Rng rng(seed, Stream::trajectory, index);
    const double duration = rng.uniform(cfg.min_duration, cfg.max_duration);
    const auto steps = static_cast<std::size_t>(std::llround(duration / cfg.dt));

    Trajectory traj;
    traj.dt = cfg.dt;
    traj.samples.reserve(steps + 1);
    VehicleState s{0.0, 0.0, wrap_angle(rng.uniform(-3.14159, 3.14159)),
                   rng.uniform(cfg.min_speed, cfg.max_speed)};
    traj.samples.push_back({0.0, s});

    double accel = 0.0;
    double yaw_rate = 0.0;
    std::size_t seg_left = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        if (seg_left == 0) {
            seg_left = static_cast<std::size_t>(
                std::llround(rng.uniform(cfg.min_segment, cfg.max_segment) / cfg.dt));
            accel = rng.uniform(-cfg.max_accel, cfg.max_accel);
            const bool turn = shape == RoadShape::curved && rng.uniform(0.0, 1.0) < 0.6;
            yaw_rate = turn ? rng.uniform(-1.0, 1.0) * cfg.max_lateral_accel /
                                  std::max(s.speed, cfg.min_speed)
                            : 0.0;
        }
        --seg_left;
        // Keep speed inside the band by flipping the acceleration at the edges.
        if ((s.speed >= cfg.max_speed && accel > 0.0) || (s.speed <= cfg.min_speed && accel < 0.0))
            accel = -accel;
        const ImuSample u{traj.samples.back().t, accel, yaw_rate};
        s = motion_step(s, u, cfg.dt);
        traj.samples.push_back({static_cast<double>(k + 1) * cfg.dt, s});
    }
    return traj;
}

/// Alternating straight and curved trips, as used by the default harness.
inline std::vector<Trajectory> generate_trajectory_set(std::size_t count, std::uint64_t seed,
                                                       const TrajectoryGenConfig& cfg = {}) {
    std::vector<Trajectory> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(generate_trajectory(i % 2 == 0 ? RoadShape::straight : RoadShape::curved,
                                          seed, i, cfg));
    return out;
}

}  // namespace gpsdefense
