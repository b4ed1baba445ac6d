// Kinematic unicycle motion model and the EKF that fuses 10 Hz IMU dead
// reckoning with 1 Hz GPS position fixes.
//
// State x = (px, py, heading, speed); input u = (accel, yaw_rate). IMU noise
// w enters additively on u, so L = df/dw is analytic.
#pragma once

#include "gpsdefense/core.hpp"

#include <string>

namespace gpsdefense {

struct EkfConfig {
    double dt = 0.1;                     // IMU step (s)
    Mat2 Q = Mat2::Identity() * 1e-4;    // IMU noise covariance: (m/s^2)^2, (rad/s)^2
    Mat2 R_gps = Mat2::Identity() * 2.25;
    Mat24 H = position_selector();

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("ekf: dt must be > 0");
        auto spd = [](const Mat2& m) {
            if (!m.allFinite() || std::abs(m(0, 1) - m(1, 0)) > 1e-12 * m.cwiseAbs().maxCoeff())
                return false;
            return m(0, 0) > 0.0 && m.determinant() > 0.0;
        };
        if (!spd(Q)) throw ConfigError("ekf: Q must be symmetric positive definite");
        if (!spd(R_gps)) throw ConfigError("ekf: R_gps must be symmetric positive definite");
    }
};

/// Initial covariance at k = 0: diag(1 m^2, 1 m^2, 0.01 rad^2, 0.25 (m/s)^2).
inline Covariance initial_covariance() {
    return Vec4(1.0, 1.0, 0.01, 0.25).asDiagonal();
}

inline void require_finite(const VehicleState& s, const char* where) {
    if (!s.finite()) throw InvalidInput(std::string(where) + ": non-finite state");
}

inline void require_finite(const ImuSample& u, const char* where) {
    if (!std::isfinite(u.accel) || !std::isfinite(u.yaw_rate) || !std::isfinite(u.t))
        throw InvalidInput(std::string(where) + ": non-finite IMU sample");
}

/// x_k = f(x_{k-1}, u_k). Position advances with the pre-update heading and speed.
inline VehicleState motion_step(const VehicleState& s, const ImuSample& u, double dt) {
    require_finite(s, "motion_step");
    require_finite(u, "motion_step");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("motion_step: dt must be > 0");
    return {
        s.px + s.speed * std::cos(s.heading) * dt,
        s.py + s.speed * std::sin(s.heading) * dt,
        wrap_angle(s.heading + u.yaw_rate * dt),
        s.speed + u.accel * dt,
    };
}

struct Jacobians {
    Mat4 F;   // df/dx
    Mat42 L;  // df/dw, w = (accel noise, yaw-rate noise)
};

inline Jacobians jacobians(const VehicleState& s, const ImuSample& u, double dt) {
    require_finite(s, "jacobians");
    require_finite(u, "jacobians");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidInput("jacobians: dt must be >= 0");
    const double c = std::cos(s.heading);
    const double sn = std::sin(s.heading);
    Jacobians j{Mat4::Identity(), Mat42::Zero()};
    j.F(0, 2) = -s.speed * sn * dt;
    j.F(0, 3) = c * dt;
    j.F(1, 2) = s.speed * c * dt;
    j.F(1, 3) = sn * dt;
    j.L(2, 1) = dt;
    j.L(3, 0) = dt;
    return j;
}

/// Propagate the estimate through one IMU step: P = F P F' + L Q L'.
inline Estimate ekf_predict(const Estimate& prior, const ImuSample& u, const EkfConfig& cfg) {
    if (!is_valid_covariance(prior.cov))
        throw InvalidInput("ekf_predict: prior covariance is not symmetric PSD");
    const Jacobians j = jacobians(prior.state, u, cfg.dt);
    Estimate out;
    out.state = motion_step(prior.state, u, cfg.dt);
    out.cov = symmetrize(j.F * prior.cov * j.F.transpose() + j.L * cfg.Q * j.L.transpose());
    return out;
}

struct UpdateResult {
    Estimate posterior;
    Vec2 innovation;  // z - Hx, handed to the detectors
    Mat2 innovation_cov;
};

/// Standard EKF position update with gain K = P H' (H P H' + R)^-1.
inline UpdateResult ekf_update(const Estimate& predicted, const GpsFix& z, const EkfConfig& cfg) {
    const Vec2 meas = z.position();
    if (!meas.allFinite()) throw InvalidInput("ekf_update: non-finite GPS fix");
    const Vec4 x = predicted.state.to_vector();
    const Mat4& p = predicted.cov;
    const Vec2 r = meas - cfg.H * x;
    const Mat2 s = cfg.H * p * cfg.H.transpose() + cfg.R_gps;
    const double det = s.determinant();
    if (!std::isfinite(det) || std::abs(det) <= 1e-300)
        throw NumericalError("ekf_update: singular innovation covariance");
    const Mat42 k = p * cfg.H.transpose() * s.inverse();
    UpdateResult res;
    res.posterior.state = VehicleState::from_vector(x + k * r);
    res.posterior.cov = symmetrize(p - k * cfg.H * p);
    res.innovation = r;
    res.innovation_cov = s;
    return res;
}

}  // namespace gpsdefense
