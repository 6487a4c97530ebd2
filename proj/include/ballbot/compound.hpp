#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "ballbot/attitude.hpp"
#include "ballbot/state3d.hpp"

namespace ballbot::compound {

// What the learning agent sees: body angle and its rate per plane plus the
// body z-axis. The ball position is deliberately not recoverable from it.
struct RlObservation {
    double phi_x = 0.0;
    double phi_dot_x = 0.0;
    double phi_y = 0.0;
    double phi_dot_y = 0.0;
    std::array<double, 3> z_attitude{0.0, 0.0, 1.0};

    std::array<double, 7> as_array() const {
        return {phi_x, phi_dot_x, phi_y, phi_dot_y, z_attitude[0], z_attitude[1], z_attitude[2]};
    }
};

inline constexpr int kObservationDim = 7;
inline constexpr int kActionDim = 2;  // virtual-wheel speed per plane

inline RlObservation observe(const sim::BallbotState3D& s) {
    const sim::BodyAttitude att = sim::attitude_of(s);
    RlObservation obs;
    obs.phi_x = s.sagittal.lean();
    obs.phi_dot_x = s.sagittal.lean_rate();
    obs.phi_y = s.coronal.lean();
    obs.phi_dot_y = s.coronal.lean_rate();
    obs.z_attitude = {att.z_axis.x(), att.z_axis.y(), att.z_axis.z()};
    return obs;
}

// Per-step reward: -|beta| + c, beta in radians. Positive whenever beta < c.
inline double reward(const sim::BodyAttitude& att, double c) { return -std::abs(att.beta) + c; }

// Maximum magnitude of the RL action (virtual-wheel speed units).
struct ActionLimits {
    double amplitude = 10.0;  // rad/s
    double u_max = 5.0;       // N m, saturation of the summed command

    // Fixed linear map from RL speed command to torque so the superposition
    // with the feedback torque is well-typed.
    double torque_scale() const { return u_max / amplitude; }
};

// Compound command for one plane: feedback torque plus scaled RL action,
// saturated. With a_rl = 0 this is exactly the conventional command.
inline double compose_command(double u_fb, double a_rl, const ActionLimits& limits) {
    const double u = u_fb + limits.torque_scale() * a_rl;
    return std::clamp(u, -limits.u_max, limits.u_max);
}

enum class EpisodeStatus { kContinue, kFallen, kRecovered };

struct TerminalCfg {
    double beta_fall = 25.0 * std::numbers::pi / 180.0;     // rad
    double beta_success = 1.0 * std::numbers::pi / 180.0;   // rad
    double t_hold = 1.0;                                    // s
    double horizon = 5.0;                                   // s
};

// Tracks how long beta has stayed continuously below the success threshold.
class HoldTimer {
  public:
    void update(double beta, double beta_success, double dt) {
        held_ = (beta < beta_success) ? held_ + dt : 0.0;
    }
    double held() const { return held_; }
    void reset() { held_ = 0.0; }

  private:
    double held_ = 0.0;
};

inline EpisodeStatus terminal(const sim::BodyAttitude& att, const HoldTimer& hold,
                              const TerminalCfg& cfg) {
    if (att.beta > cfg.beta_fall) return EpisodeStatus::kFallen;
    if (hold.held() >= cfg.t_hold) return EpisodeStatus::kRecovered;
    return EpisodeStatus::kContinue;
}

}  // namespace ballbot::compound
