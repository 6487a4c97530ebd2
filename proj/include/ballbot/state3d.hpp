#pragma once

#include "ballbot/attitude.hpp"
#include "ballbot/dynamics.hpp"

namespace ballbot::sim {

// Full 3D state as two decoupled planes sharing the time axis. The sagittal
// plane lives in xz, the coronal plane in yz.
struct BallbotState3D {
    dynamics::PlanarState sagittal;
    dynamics::PlanarState coronal;
    double t = 0.0;

    bool finite() const { return sagittal.finite() && coronal.finite(); }
};

// The per-plane body angle is theta + phi (the potential depends on it, and
// an IMU would report it); phi alone is the coordinate relative to the ball.
inline BodyAttitude attitude_of(const BallbotState3D& s) {
    return planar_to_tilt(s.sagittal.lean(), s.coronal.lean());
}

// Static tilt with the ball at the origin: the whole lean sits in phi.
inline BallbotState3D initial_state(const BodyAttitude& att) {
    const PlaneLean lean = tilt_to_planar(att);
    BallbotState3D s;
    s.sagittal.phi = lean.phi_x;
    s.coronal.phi = lean.phi_y;
    return s;
}

}  // namespace ballbot::sim
