#pragma once

#include <functional>
#include <utility>

#include "ballbot/compound.hpp"
#include "ballbot/ddpg.hpp"
#include "ballbot/episode.hpp"

namespace ballbot::exp {

using InitialStateSampler = std::function<sim::BodyAttitude(Rng&)>;

// Recovery task as a learning environment. One agent step holds the RL action
// for rl_hold_steps physics steps while the feedback torque updates every
// step; the reward is taken at the resulting state. Falling is the absorbing
// terminal; a met recovery hold or the horizon only truncate.
class BalanceRecoveryEnv : public ddpg::Environment {
  public:
    BalanceRecoveryEnv(sim::SimCfg cfg, linctl::GainVector gain, double reward_c,
                       InitialStateSampler sampler)
        : cfg_(std::move(cfg)), gain_(gain), reward_c_(reward_c), sampler_(std::move(sampler)) {}

    int observation_dim() const override { return compound::kObservationDim; }
    int action_dim() const override { return compound::kActionDim; }

    std::vector<double> reset(Rng& rng) override {
        state_ = sim::initial_state(sampler_(rng));
        hold_ = compound::HoldTimer{};
        steps_ = 0;
        const auto obs = compound::observe(state_).as_array();
        return {obs.begin(), obs.end()};
    }

    StepResult step(const std::vector<double>& action) override {
        if (action.size() != 2) throw ShapeMismatch("BalanceRecoveryEnv expects a 2d action");
        bool fallen = false;
        for (int k = 0; k < cfg_.rl_hold_steps && !fallen; ++k) {
            const double u_fb_x = linctl::feedback_torque(gain_, state_.sagittal.vec());
            const double u_fb_y = linctl::feedback_torque(gain_, state_.coronal.vec());
            const double u_x = compound::compose_command(u_fb_x, action[0], cfg_.limits);
            const double u_y = compound::compose_command(u_fb_y, action[1], cfg_.limits);
            const sim::BodyAttitude att = sim::attitude_of(state_);
            const double eff = sim::actuation_effectiveness(cfg_.envelope, att);
            state_.sagittal = sim::rk4_step(cfg_.params, state_.sagittal, eff * u_x, cfg_.dt);
            state_.coronal = sim::rk4_step(cfg_.params, state_.coronal, eff * u_y, cfg_.dt);
            state_.t += cfg_.dt;
            ++steps_;
            const sim::BodyAttitude att_new = sim::attitude_of(state_);
            hold_.update(att_new.beta, cfg_.terminal.beta_success, cfg_.dt);
            fallen = att_new.beta > cfg_.terminal.beta_fall;
        }
        const sim::BodyAttitude att = sim::attitude_of(state_);
        StepResult res;
        const auto obs = compound::observe(state_).as_array();
        res.obs = {obs.begin(), obs.end()};
        res.reward = compound::reward(att, reward_c_);
        res.done = fallen;
        const bool truncated = hold_.held() >= cfg_.terminal.t_hold ||
                               state_.t >= cfg_.terminal.horizon - 0.5 * cfg_.dt;
        res.episode_end = fallen || truncated;
        return res;
    }

    // Agent steps available before the horizon truncates an episode.
    int max_agent_steps() const {
        return static_cast<int>(cfg_.terminal.horizon / (cfg_.dt * cfg_.rl_hold_steps) + 0.5) + 1;
    }

  private:
    sim::SimCfg cfg_;
    linctl::GainVector gain_;
    double reward_c_;
    InitialStateSampler sampler_;
    sim::BallbotState3D state_;
    compound::HoldTimer hold_;
    int steps_ = 0;
};

}  // namespace ballbot::exp
