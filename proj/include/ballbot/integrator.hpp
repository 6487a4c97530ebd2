#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ballbot/dynamics.hpp"
#include "ballbot/errors.hpp"

namespace ballbot::sim {

// One classical RK4 step of the planar dynamics with zero-order-hold torque.
// dt must lie in (0, 0.05].
inline dynamics::PlanarState rk4_step(const PhysicalParams& p, const dynamics::PlanarState& s,
                                      double tau, double dt) {
    if (!(dt > 0.0) || dt > 0.05) throw ConfigError("rk4_step: dt must be in (0, 0.05]");

    auto deriv = [&](const Eigen::Vector4d& x) -> Eigen::Vector4d {
        const auto acc = dynamics::forward_dynamics(p, dynamics::PlanarState::from_vec(x), tau);
        return {x[2], x[3], acc[0], acc[1]};
    };

    const Eigen::Vector4d x0 = s.vec();
    const Eigen::Vector4d k1 = deriv(x0);
    const Eigen::Vector4d k2 = deriv(x0 + 0.5 * dt * k1);
    const Eigen::Vector4d k3 = deriv(x0 + 0.5 * dt * k2);
    const Eigen::Vector4d k4 = deriv(x0 + dt * k3);
    const Eigen::Vector4d x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const auto out = dynamics::PlanarState::from_vec(x1);
    if (!out.finite()) throw NonFinite("rk4_step produced a non-finite state");
    return out;
}

}  // namespace ballbot::sim
