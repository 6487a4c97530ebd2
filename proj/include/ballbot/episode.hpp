#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ballbot/compound.hpp"
#include "ballbot/contact.hpp"
#include "ballbot/integrator.hpp"
#include "ballbot/linctl.hpp"
#include "ballbot/omniwheel.hpp"
#include "ballbot/state3d.hpp"

namespace ballbot::sim {

struct SimCfg {
    PhysicalParams params;
    ContactEnvelope envelope;
    compound::TerminalCfg terminal;
    compound::ActionLimits limits;
    double dt = 1e-3;       // physics and feedback step (s)
    int rl_hold_steps = 10; // RL action zero-order-hold, in physics steps

    static SimCfg from_config(const KeyedConfig& cfg) {
        constexpr double deg = std::numbers::pi / 180.0;
        SimCfg c;
        c.params = PhysicalParams::from_config(cfg);
        c.envelope = ContactEnvelope::from_config(cfg);
        c.dt = cfg.get_double("dt", c.dt);
        c.rl_hold_steps = static_cast<int>(cfg.get_int("rl_hold_steps", c.rl_hold_steps));
        c.terminal.beta_fall = cfg.get_double("beta_fall_deg", c.terminal.beta_fall / deg) * deg;
        c.terminal.beta_success = cfg.get_double("beta_success_deg", c.terminal.beta_success / deg) * deg;
        c.terminal.t_hold = cfg.get_double("t_hold", c.terminal.t_hold);
        c.terminal.horizon = cfg.get_double("horizon", c.terminal.horizon);
        c.limits.amplitude = cfg.get_double("amplitude", c.limits.amplitude);
        c.limits.u_max = cfg.get_double("u_max", c.limits.u_max);
        if (!(c.dt > 0.0) || c.dt > 0.05) throw ConfigError("dt must be in (0, 0.05]");
        if (c.rl_hold_steps < 1) throw ConfigError("rl_hold_steps must be >= 1");
        return c;
    }
};

// Per-plane commands produced by a controller at one step. u_fb is the raw
// feedback torque, u_rl the torque-domain RL contribution, u the composed
// saturated command actually sent to the plant.
struct PlaneCommands {
    double u_fb_x = 0.0;
    double u_fb_y = 0.0;
    double u_rl_x = 0.0;
    double u_rl_y = 0.0;
    double u_x = 0.0;
    double u_y = 0.0;
};

using Controller = std::function<PlaneCommands(const BallbotState3D&, int step)>;

struct EpisodeRow {
    double t = 0.0;
    double phi_x = 0.0;
    double phi_y = 0.0;
    double dphi_x = 0.0;
    double dphi_y = 0.0;
    double beta = 0.0;  // rad; serialized in degrees
    std::array<double, 3> wheel_speeds{0.0, 0.0, 0.0};
    PlaneCommands cmd;
};

struct EpisodeLog {
    std::vector<EpisodeRow> rows;
    bool recovered = false;
    compound::EpisodeStatus final_status = compound::EpisodeStatus::kContinue;
    double end_time = 0.0;  // fall time, settle time, or the horizon
    double max_beta = 0.0;  // rad
    bool aborted = false;
    std::string abort_reason;
    std::uint64_t seed = 0;
};

// Conventional controller: u = -K x per plane, zero RL action.
inline Controller make_linear_controller(const linctl::GainVector& gain,
                                         const compound::ActionLimits& limits) {
    return [gain, limits](const BallbotState3D& s, int) {
        PlaneCommands cmd;
        cmd.u_fb_x = linctl::feedback_torque(gain, s.sagittal.vec());
        cmd.u_fb_y = linctl::feedback_torque(gain, s.coronal.vec());
        cmd.u_x = compound::compose_command(cmd.u_fb_x, 0.0, limits);
        cmd.u_y = compound::compose_command(cmd.u_fb_y, 0.0, limits);
        return cmd;
    };
}

using Policy = std::function<std::array<double, 2>(const compound::RlObservation&)>;

// Feedback plus superposed RL action. The policy is queried every
// rl_hold_steps physics steps and its action held in between; the feedback
// torque updates every step.
inline Controller make_compound_controller(const linctl::GainVector& gain, Policy policy,
                                           const compound::ActionLimits& limits,
                                           int rl_hold_steps) {
    auto held = std::make_shared<std::array<double, 2>>(std::array<double, 2>{0.0, 0.0});
    return [gain, policy = std::move(policy), limits, rl_hold_steps, held](const BallbotState3D& s,
                                                                           int step) {
        if (step % rl_hold_steps == 0) *held = policy(compound::observe(s));
        PlaneCommands cmd;
        cmd.u_fb_x = linctl::feedback_torque(gain, s.sagittal.vec());
        cmd.u_fb_y = linctl::feedback_torque(gain, s.coronal.vec());
        cmd.u_rl_x = limits.torque_scale() * (*held)[0];
        cmd.u_rl_y = limits.torque_scale() * (*held)[1];
        cmd.u_x = compound::compose_command(cmd.u_fb_x, (*held)[0], limits);
        cmd.u_y = compound::compose_command(cmd.u_fb_y, (*held)[1], limits);
        return cmd;
    };
}

// Fixed-step rollout from a static initial tilt. Stops early on a fall or
// once the recovery hold is met; otherwise runs to the horizon. Logged wheel
// speeds are reconstructions from the saturated plane commands (the plant is
// torque-driven); they exist for plotting, not for the dynamics.
inline EpisodeLog run_episode(const SimCfg& cfg, const Controller& controller,
                              const BodyAttitude& initial, std::uint64_t seed) {
    EpisodeLog log;
    log.seed = seed;
    BallbotState3D state = initial_state(initial);
    compound::HoldTimer hold;

    const int max_steps = static_cast<int>(cfg.terminal.horizon / cfg.dt + 0.5);
    log.rows.reserve(static_cast<std::size_t>(max_steps) + 1);

    for (int step = 0;; ++step) {
        const BodyAttitude att = attitude_of(state);
        hold.update(att.beta, cfg.terminal.beta_success, cfg.dt);
        log.max_beta = std::max(log.max_beta, att.beta);

        PlaneCommands cmd;
        try {
            cmd = controller(state, step);
        } catch (const std::exception& e) {
            log.aborted = true;
            log.abort_reason = e.what();
            log.end_time = state.t;
            return log;
        }

        EpisodeRow row;
        row.t = state.t;
        row.phi_x = state.sagittal.lean();
        row.phi_y = state.coronal.lean();
        row.dphi_x = state.sagittal.lean_rate();
        row.dphi_y = state.coronal.lean_rate();
        row.beta = att.beta;
        row.cmd = cmd;
        // Motor-speed reconstruction: map the saturated torque commands back
        // to virtual-wheel speeds, then project to the three motors.
        const double to_speed = cfg.limits.amplitude / cfg.limits.u_max;
        row.wheel_speeds =
            virtual_to_wheel_speeds(cmd.u_x * to_speed, cmd.u_y * to_speed, cfg.envelope.wheel_alphas);
        log.rows.push_back(row);

        const compound::EpisodeStatus status = compound::terminal(att, hold, cfg.terminal);
        if (status != compound::EpisodeStatus::kContinue) {
            log.final_status = status;
            log.recovered = status == compound::EpisodeStatus::kRecovered;
            log.end_time = state.t;
            return log;
        }
        if (step >= max_steps) {
            log.final_status = compound::EpisodeStatus::kContinue;
            log.recovered = hold.held() >= cfg.terminal.t_hold;
            log.end_time = state.t;
            return log;
        }

        const double eff = actuation_effectiveness(cfg.envelope, att);
        try {
            state.sagittal = rk4_step(cfg.params, state.sagittal, eff * cmd.u_x, cfg.dt);
            state.coronal = rk4_step(cfg.params, state.coronal, eff * cmd.u_y, cfg.dt);
        } catch (const std::exception& e) {
            log.aborted = true;
            log.abort_reason = e.what();
            log.end_time = state.t;
            return log;
        }
        state.t = (step + 1) * cfg.dt;
    }
}

}  // namespace ballbot::sim
