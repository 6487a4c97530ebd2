#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "ballbot/attitude.hpp"
#include "ballbot/config.hpp"
#include "ballbot/errors.hpp"

namespace ballbot::sim {

// Direction-dependent actuation envelope. Drive effectiveness is full up to
// beta_full(alpha), zero beyond beta_zero(alpha), and both thresholds swing
// between an on-wheel low and an off-wheel high with period 2*pi/3:
//
//   mix(alpha)        = (1 - cos(3 * (alpha - wheel_alphas[0]))) / 2
//   beta_full(alpha)  = full_on  + (full_off  - full_on)  * mix(alpha)
//   beta_zero(alpha)  = zero_on  + (zero_off  - zero_on)  * mix(alpha)
//   effectiveness     = clamp((beta_zero - beta) / (beta_zero - beta_full), 0, 1) ^ sharpness
//
// This is the stand-in for wheel-contact loss at large tilt: torque in both
// planes is multiplied by the effectiveness of the current attitude.
struct ContactEnvelope {
    double beta_full_on = 6.0 * std::numbers::pi / 180.0;    // rad, along a wheel direction
    double beta_full_off = 10.0 * std::numbers::pi / 180.0;  // rad, midway between wheels
    double beta_zero_on = 9.0 * std::numbers::pi / 180.0;
    double beta_zero_off = 14.0 * std::numbers::pi / 180.0;
    std::array<double, 3> wheel_alphas{std::numbers::pi / 2.0,
                                       std::numbers::pi / 2.0 + 2.0 * std::numbers::pi / 3.0,
                                       std::numbers::pi / 2.0 + 4.0 * std::numbers::pi / 3.0};
    double sharpness = 3.0;

    void validate() const {
        if (!(beta_full_on > 0.0) || !(beta_full_off > 0.0))
            throw ConfigError("contact envelope: beta_full must be > 0");
        if (!(beta_zero_on > beta_full_on) || !(beta_zero_off > beta_full_off))
            throw ConfigError("contact envelope: beta_zero must exceed beta_full");
        if (!(sharpness > 0.0)) throw ConfigError("contact envelope: sharpness must be > 0");
        const double spacing = 2.0 * std::numbers::pi / 3.0;
        for (int i = 0; i < 3; ++i) {
            const double gap = wheel_alphas[(i + 1) % 3] - wheel_alphas[i];
            const double wrapped = std::remainder(gap - spacing, 2.0 * std::numbers::pi);
            if (std::abs(wrapped) > 1e-12)
                throw ConfigError("contact envelope: wheel directions must be 120 deg apart");
        }
    }

    // 0 on a wheel direction, 1 midway between two wheels.
    double wheel_mix(double alpha) const {
        return 0.5 * (1.0 - std::cos(3.0 * (alpha - wheel_alphas[0])));
    }

    double beta_full(double alpha) const {
        return beta_full_on + (beta_full_off - beta_full_on) * wheel_mix(alpha);
    }

    double beta_zero(double alpha) const {
        return beta_zero_on + (beta_zero_off - beta_zero_on) * wheel_mix(alpha);
    }

    static ContactEnvelope from_config(const KeyedConfig& cfg) {
        constexpr double deg = std::numbers::pi / 180.0;
        ContactEnvelope env;
        env.beta_full_on = cfg.get_double("env_beta_full_on_deg", env.beta_full_on / deg) * deg;
        env.beta_full_off = cfg.get_double("env_beta_full_off_deg", env.beta_full_off / deg) * deg;
        env.beta_zero_on = cfg.get_double("env_beta_zero_on_deg", env.beta_zero_on / deg) * deg;
        env.beta_zero_off = cfg.get_double("env_beta_zero_off_deg", env.beta_zero_off / deg) * deg;
        env.sharpness = cfg.get_double("env_sharpness", env.sharpness);
        const double a0 = cfg.get_double("wheel_alpha0_deg", 90.0) * deg;
        env.wheel_alphas = {a0, a0 + 2.0 * std::numbers::pi / 3.0, a0 + 4.0 * std::numbers::pi / 3.0};
        env.validate();
        return env;
    }
};

// Fraction of the commanded torque that reaches the ball at this attitude.
inline double actuation_effectiveness(const ContactEnvelope& env, const BodyAttitude& att) {
    const double lo = env.beta_full(att.alpha);
    const double hi = env.beta_zero(att.alpha);
    if (att.beta <= lo) return 1.0;
    if (att.beta >= hi) return 0.0;
    const double s = (hi - att.beta) / (hi - lo);
    return std::pow(s, env.sharpness);
}

}  // namespace ballbot::sim
