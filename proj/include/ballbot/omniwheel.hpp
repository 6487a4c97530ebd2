#pragma once

#include <array>
#include <cmath>

namespace ballbot::sim {

// Project per-plane virtual-wheel speeds onto the three motor directions.
// Wheel i drives along azimuth alpha_i, so it picks up the tangential
// component v_x cos(alpha_i) + v_y sin(alpha_i). Linear in (v_x, v_y).
inline std::array<double, 3> virtual_to_wheel_speeds(double v_x, double v_y,
                                                     const std::array<double, 3>& wheel_alphas) {
    std::array<double, 3> w{};
    for (int i = 0; i < 3; ++i)
        w[i] = v_x * std::cos(wheel_alphas[i]) + v_y * std::sin(wheel_alphas[i]);
    return w;
}

// Least-squares inverse of the 3x2 projection; for wheels 120 deg apart the
// normal matrix is (3/2) I, so the reconstruction is (2/3) W^T omega.
inline std::array<double, 2> wheel_to_virtual_speeds(const std::array<double, 3>& omega,
                                                     const std::array<double, 3>& wheel_alphas) {
    double vx = 0.0;
    double vy = 0.0;
    for (int i = 0; i < 3; ++i) {
        vx += std::cos(wheel_alphas[i]) * omega[i];
        vy += std::sin(wheel_alphas[i]) * omega[i];
    }
    return {2.0 / 3.0 * vx, 2.0 / 3.0 * vy};
}

}  // namespace ballbot::sim
