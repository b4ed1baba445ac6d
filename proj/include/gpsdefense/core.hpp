// Shared vocabulary types: vehicle state, sensor samples, errors and small
// geometry helpers used by every other header in the library.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gpsdefense {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;
using Mat42 = Eigen::Matrix<double, 4, 2>;

/// Covariance of a VehicleState, ordered (px, py, heading, speed).
using Covariance = Mat4;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values, violated preconditions, malformed input files.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Configuration file or parameter combination is unusable.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be invertible is not, or an iteration diverged.
class NumericalError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Angles

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(a, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

// ---------------------------------------------------------------------------
// State and samples

struct VehicleState {
    double px = 0.0;       // east (m)
    double py = 0.0;       // north (m)
    double heading = 0.0;  // yaw (rad), (-pi, pi]
    double speed = 0.0;    // longitudinal (m/s)

    Vec2 position() const { return {px, py}; }

    Vec4 to_vector() const { return {px, py, heading, speed}; }

    static VehicleState from_vector(const Vec4& v) {
        return {v(0), v(1), wrap_angle(v(2)), v(3)};
    }

    bool finite() const {
        return std::isfinite(px) && std::isfinite(py) && std::isfinite(heading) &&
               std::isfinite(speed);
    }

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct ImuSample {
    double t = 0.0;         // s
    double accel = 0.0;     // m/s^2
    double yaw_rate = 0.0;  // rad/s

    friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

struct GpsFix {
    double t = 0.0;
    double px = 0.0;
    double py = 0.0;
    // Ground-truth label for metrics. Estimators and detectors never read it.
    bool spoofed = false;

    Vec2 position() const { return {px, py}; }

    friend bool operator==(const GpsFix&, const GpsFix&) = default;
};

/// A state estimate and its uncertainty.
struct Estimate {
    VehicleState state;
    Covariance cov = Covariance::Zero();
};

/// Selects (px, py) out of the 4-state.
inline Mat24 position_selector() {
    Mat24 h = Mat24::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return h;
}

inline bool all_finite(const auto& m) { return m.allFinite(); }

/// Symmetric and positive semidefinite (eigenvalues >= -1e-9 * trace).
inline bool is_valid_covariance(const Covariance& p) {
    if (!p.allFinite()) return false;
    const double scale = std::max(p.cwiseAbs().maxCoeff(), 1e-300);
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) return false;
    const Covariance sym = 0.5 * (p + p.transpose());
    Eigen::SelfAdjointEigenSolver<Covariance> es(sym, Eigen::EigenvaluesOnly);
    const double tol = 1e-9 * std::max(std::abs(sym.trace()), 1e-300);
    return es.eigenvalues().minCoeff() >= -tol;
}

template <typename Derived>
inline auto symmetrize(const Eigen::MatrixBase<Derived>& m) {
    return (0.5 * (m + m.transpose())).eval();
}

}  // namespace gpsdefense
