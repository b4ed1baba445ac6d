// Independent reference EKF shared by the unit tests and the acceptance run.
#pragma once

#include "gpsdefense/state_estimation.hpp"

#include <array>
#include <cmath>
#include <random>
#include <utility>

namespace gpsdefense::testing {

using Arr4 = std::array<std::array<double, 4>, 4>;

// Plain-array reference computations, written out element by element so they
// share nothing with the Eigen expressions under test.
struct Oracle {
    static Arr4 mul(const Arr4& a, const Arr4& b) {
        Arr4 c{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) c[i][j] += a[i][k] * b[k][j];
        return c;
    }
    static Arr4 transpose(const Arr4& a) {
        Arr4 t{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) t[i][j] = a[j][i];
        return t;
    }

    // Returns (state, covariance) after one predict step.
    static std::pair<std::array<double, 4>, Arr4> predict(const std::array<double, 4>& x, const Arr4& p,
                                                          double accel, double omega, double qa,
                                                          double qw, double dt) {
        const double c = std::cos(x[2]), s = std::sin(x[2]);
        std::array<double, 4> xn{x[0] + x[3] * c * dt, x[1] + x[3] * s * dt, x[2] + omega * dt,
                                 x[3] + accel * dt};
        xn[2] = std::atan2(std::sin(xn[2]), std::cos(xn[2]));
        Arr4 f{};
        for (int i = 0; i < 4; ++i) f[i][i] = 1.0;
        f[0][2] = -x[3] * s * dt;
        f[0][3] = c * dt;
        f[1][2] = x[3] * c * dt;
        f[1][3] = s * dt;
        Arr4 pn = mul(mul(f, p), transpose(f));
        // L Q L' only touches heading (gyro) and speed (accel).
        pn[2][2] += dt * dt * qw;
        pn[3][3] += dt * dt * qa;
        Arr4 sym{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) sym[i][j] = 0.5 * (pn[i][j] + pn[j][i]);
        return {xn, sym};
    }

    static std::pair<std::array<double, 4>, Arr4> update(const std::array<double, 4>& x, const Arr4& p,
                                                         double zx, double zy, double r00, double r01,
                                                         double r11) {
        const double s00 = p[0][0] + r00, s01 = p[0][1] + r01, s10 = p[1][0] + r01, s11 = p[1][1] + r11;
        const double det = s00 * s11 - s01 * s10;
        const double i00 = s11 / det, i01 = -s01 / det, i10 = -s10 / det, i11 = s00 / det;
        double k[4][2];
        for (int i = 0; i < 4; ++i) {
            k[i][0] = p[i][0] * i00 + p[i][1] * i10;
            k[i][1] = p[i][0] * i01 + p[i][1] * i11;
        }
        const double rx = zx - x[0], ry = zy - x[1];
        std::array<double, 4> xn{};
        for (int i = 0; i < 4; ++i) xn[i] = x[i] + k[i][0] * rx + k[i][1] * ry;
        xn[2] = std::atan2(std::sin(xn[2]), std::cos(xn[2]));
        Arr4 pn{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) pn[i][j] = p[i][j] - (k[i][0] * p[0][j] + k[i][1] * p[1][j]);
        Arr4 sym{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) sym[i][j] = 0.5 * (pn[i][j] + pn[j][i]);
        return {xn, sym};
    }
};

Covariance random_spd(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat4 a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = u(rng);
    return symmetrize(a * a.transpose() + 0.1 * Mat4::Identity());
}

VehicleState random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-500.0, 500.0), hd(-3.1, 3.1), sp(0.0, 35.0);
    return {pos(rng), pos(rng), hd(rng), sp(rng)};
}

Arr4 to_arr(const Mat4& m) {
    Arr4 a{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = m(i, j);
    return a;
}

}  // namespace gpsdefense::testing
