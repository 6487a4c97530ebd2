#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace ballbot::sim {

// Body orientation as tilt direction alpha (about the world z-axis) and tilt
// magnitude beta (inclination from vertical). z_axis is the body z-axis in
// the world frame; beta = 0 means upright, z_axis = (0,0,1).
struct BodyAttitude {
    double alpha = 0.0;   // rad, in [-pi, pi]
    double beta = 0.0;    // rad, in [0, pi/2)
    Eigen::Vector3d z_axis{0.0, 0.0, 1.0};
};

inline BodyAttitude make_attitude(double alpha, double beta) {
    BodyAttitude att;
    att.alpha = alpha;
    att.beta = beta;
    // Rz(alpha) * Ry(beta) applied to (0,0,1).
    att.z_axis = {std::cos(alpha) * std::sin(beta), std::sin(alpha) * std::sin(beta), std::cos(beta)};
    return att;
}

// Decompose the tilted body axis into per-plane lean angles:
// phi_x = atan2(z_x, z_z) in the xz-plane, phi_y = atan2(z_y, z_z) in yz.
struct PlaneLean {
    double phi_x = 0.0;
    double phi_y = 0.0;
};

inline PlaneLean tilt_to_planar(const BodyAttitude& att) {
    return {std::atan2(att.z_axis.x(), att.z_axis.z()), std::atan2(att.z_axis.y(), att.z_axis.z())};
}

// Inverse of tilt_to_planar on its range (beta < pi/2). For beta = 0 the
// direction alpha is undefined; 0 is returned.
inline BodyAttitude planar_to_tilt(double phi_x, double phi_y) {
    const double tx = std::tan(phi_x);
    const double ty = std::tan(phi_y);
    const double norm = std::sqrt(1.0 + tx * tx + ty * ty);
    BodyAttitude att;
    att.z_axis = {tx / norm, ty / norm, 1.0 / norm};
    att.beta = std::atan(std::hypot(tx, ty));
    att.alpha = (att.beta > 0.0) ? std::atan2(ty, tx) : 0.0;
    return att;
}

}  // namespace ballbot::sim
