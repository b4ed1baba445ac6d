// Ground-truth trajectories and the synthetic IMU / GPS streams derived
// from them.
#pragma once

#include "gpsdefense/core.hpp"
#include "gpsdefense/rng.hpp"
#include "gpsdefense/state_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace gpsdefense {

struct TrajectorySample {
    double t = 0.0;
    VehicleState state;
};

/// Uniformly sampled ground truth. Sample spacing equals the IMU step.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.1;

    std::size_t size() const { return samples.size(); }
    double start_time() const { return samples.front().t; }
    double duration() const { return samples.back().t - samples.front().t; }

    void validate() const {
        if (samples.size() < 2) throw InvalidInput("trajectory: need at least 2 samples");
        if (!(dt > 0.0)) throw InvalidInput("trajectory: dt must be > 0");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!samples[i].state.finite() || !std::isfinite(samples[i].t))
                throw InvalidInput("trajectory: non-finite sample " + std::to_string(i));
            if (i > 0) {
                const double step = samples[i].t - samples[i - 1].t;
                if (!(step > 0.0)) throw InvalidInput("trajectory: timestamps not increasing");
                if (std::abs(step - dt) > 1e-6 * dt)
                    throw InvalidInput("trajectory: spacing differs from dt");
            }
        }
    }
};

struct SensorNoiseConfig {
    double gps_sigma = 1.5;          // m, per axis
    double imu_accel_sigma = 0.05;   // m/s^2
    double imu_gyro_sigma = 0.005;   // rad/s
    std::uint64_t seed = 1;

    void validate() const {
        if (!(gps_sigma >= 0.0) || !(imu_accel_sigma >= 0.0) || !(imu_gyro_sigma >= 0.0))
            throw ConfigError("sensors: sigmas must be >= 0");
    }

    /// The EKF noise model matching these sensors.
    Mat2 imu_covariance() const {
        return Vec2(imu_accel_sigma * imu_accel_sigma, imu_gyro_sigma * imu_gyro_sigma)
            .asDiagonal();
    }
    Mat2 gps_covariance() const { return Mat2::Identity() * gps_sigma * gps_sigma; }
};

namespace detail {

inline TrajectorySample lerp_sample(const TrajectorySample& a, const TrajectorySample& b,
                                    double t) {
    const double w = (t - a.t) / (b.t - a.t);
    auto mix = [w](double x, double y) { return x + w * (y - x); };
    TrajectorySample s;
    s.t = t;
    s.state.px = mix(a.state.px, b.state.px);
    s.state.py = mix(a.state.py, b.state.py);
    s.state.heading = wrap_angle(a.state.heading + w * wrap_angle(b.state.heading - a.state.heading));
    s.state.speed = mix(a.state.speed, b.state.speed);
    return s;
}

inline std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace detail

/// Resample raw (possibly non-uniform) samples onto a dt grid starting at the
/// first timestamp. Heading interpolates along the shortest arc.
inline Trajectory resample(const std::vector<TrajectorySample>& raw, double dt) {
    if (raw.size() < 2) throw InvalidInput("trajectory: need at least 2 samples");
    bool uniform = true;
    for (std::size_t i = 1; i < raw.size(); ++i)
        uniform = uniform && std::abs((raw[i].t - raw[i - 1].t) - dt) <= 1e-9 * std::max(1.0, dt);
    Trajectory out;
    out.dt = dt;
    if (uniform) {
        out.samples = raw;
    } else {
        const double t0 = raw.front().t;
        const double t_end = raw.back().t;
        std::size_t seg = 0;
        for (std::size_t k = 0;; ++k) {
            const double t = t0 + static_cast<double>(k) * dt;
            if (t > t_end + 1e-9) break;
            while (seg + 2 < raw.size() && raw[seg + 1].t < t) ++seg;
            out.samples.push_back(detail::lerp_sample(raw[seg], raw[seg + 1], std::min(t, t_end)));
            out.samples.back().t = t;
        }
    }
    out.validate();
    return out;
}

/// Parse a `t,x,y,heading,speed` CSV. Errors carry the 1-based line number.
inline Trajectory parse_trajectory(std::istream& in, double dt) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("trajectory: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (detail::trim(line) != "t,x,y,heading,speed")
        throw InvalidInput("trajectory: line 1: header must be 't,x,y,heading,speed'");

    std::vector<TrajectorySample> raw;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double v[5];
        int n = 0;
        while (std::getline(ss, cell, ',')) {
            if (n == 5) {
                n = 6;
                break;
            }
            cell = detail::trim(cell);
            std::size_t used = 0;
            try {
                v[n] = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size() || !std::isfinite(v[n]))
                throw InvalidInput("trajectory: line " + std::to_string(lineno) +
                                   ": malformed value '" + cell + "'");
            ++n;
        }
        if (n != 5)
            throw InvalidInput("trajectory: line " + std::to_string(lineno) +
                               ": expected 5 columns");
        if (!raw.empty() && !(v[0] > raw.back().t))
            throw InvalidInput("trajectory: line " + std::to_string(lineno) +
                               ": timestamps must be strictly increasing");
        raw.push_back({v[0], {v[1], v[2], wrap_angle(v[3]), v[4]}});
    }
    return resample(raw, dt);
}

inline Trajectory load_trajectory(const std::string& path, double dt) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("trajectory: cannot open " + path);
    try {
        return parse_trajectory(in, dt);
    } catch (const InvalidInput& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

inline void write_trajectory(std::ostream& out, const Trajectory& traj) {
    out << "t,x,y,heading,speed\n";
    out.precision(17);
    for (const auto& s : traj.samples)
        out << s.t << ',' << s.state.px << ',' << s.state.py << ',' << s.state.heading << ','
            << s.state.speed << '\n';
}

/// One sample per trajectory step; sample k drives the state from t_k to t_{k+1}.
inline std::vector<ImuSample> synthesize_imu(const Trajectory& traj, const SensorNoiseConfig& cfg) {
    Rng rng(cfg.seed, Stream::imu);
    std::vector<ImuSample> out;
    out.reserve(traj.size());
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const auto& a = traj.samples[k].state;
        const auto& b = traj.samples[k + 1].state;
        ImuSample u;
        u.t = traj.samples[k].t;
        u.accel = (b.speed - a.speed) / traj.dt;
        u.yaw_rate = wrap_angle(b.heading - a.heading) / traj.dt;
        u.accel += rng.normal(0.0, cfg.imu_accel_sigma);
        u.yaw_rate += rng.normal(0.0, cfg.imu_gyro_sigma);
        out.push_back(u);
    }
    return out;
}

/// Number of IMU steps per GPS period (1 Hz).
inline std::size_t steps_per_second(double dt) {
    return static_cast<std::size_t>(std::llround(1.0 / dt));
}

/// One fix per whole second of trajectory time after the start.
inline std::vector<GpsFix> synthesize_gps(const Trajectory& traj, const SensorNoiseConfig& cfg) {
    Rng rng(cfg.seed, Stream::gps);
    std::vector<GpsFix> out;
    const std::size_t stride = std::max<std::size_t>(1, steps_per_second(traj.dt));
    for (std::size_t k = stride; k < traj.size(); k += stride) {
        const auto& s = traj.samples[k];
        GpsFix f;
        f.t = s.t;
        f.px = s.state.px + rng.normal(0.0, cfg.gps_sigma);
        f.py = s.state.py + rng.normal(0.0, cfg.gps_sigma);
        out.push_back(f);
    }
    return out;
}

}  // namespace gpsdefense
