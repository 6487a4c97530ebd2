#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "ballbot/adam.hpp"
#include "ballbot/config.hpp"
#include "ballbot/errors.hpp"
#include "ballbot/mlp.hpp"
#include "ballbot/noise.hpp"
#include "ballbot/pool.hpp"
#include "ballbot/replay.hpp"
#include "ballbot/rng.hpp"

namespace ballbot::ddpg {

struct DdpgHyper {
    double actor_lr = 1e-4;
    double critic_lr = 1e-4;
    double weight_decay = 1e-5;  // coupled L2, critic only
    int minibatch = 128;
    std::size_t buffer_capacity = 50000;
    double gamma = 0.99;
    double tau_soft = 0.005;
    double reward_c = 0.7;
    std::vector<int> hidden_sizes{64, 64};
    std::string noise_type = "ou";
    double ou_theta = 0.15;
    double ou_sigma = 0.2;  // relative to the action amplitude
    double ou_dt = 0.01;
    double gaussian_sigma = 0.1;  // relative to the action amplitude
    double action_amplitude = 10.0;
    double actor_final_scale = 1e-3;
    int threads = 4;

    void validate() const {
        if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw ConfigError("learning rates must be >= 0");
        if (weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
        if (minibatch <= 0) throw ConfigError("minibatch must be positive");
        if (buffer_capacity == 0) throw ConfigError("buffer capacity must be positive");
        if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
        if (!(tau_soft > 0.0) || tau_soft > 1.0) throw ConfigError("tau_soft must lie in (0, 1]");
        if (!(action_amplitude > 0.0)) throw ConfigError("action amplitude must be positive");
        if (hidden_sizes.empty()) throw ConfigError("at least one hidden layer is required");
        for (int h : hidden_sizes)
            if (h <= 0) throw ConfigError("hidden sizes must be positive");
        if (threads < 1) throw ConfigError("threads must be >= 1");
    }

    static DdpgHyper from_config(const KeyedConfig& cfg) {
        DdpgHyper h;
        h.actor_lr = cfg.get_double("actor_lr", h.actor_lr);
        h.critic_lr = cfg.get_double("critic_lr", h.critic_lr);
        h.weight_decay = cfg.get_double("weight_decay", h.weight_decay);
        h.minibatch = static_cast<int>(cfg.get_int("minibatch", h.minibatch));
        h.buffer_capacity = static_cast<std::size_t>(cfg.get_int("buffer_capacity",
                                                                 static_cast<long>(h.buffer_capacity)));
        h.gamma = cfg.get_double("gamma", h.gamma);
        h.tau_soft = cfg.get_double("tau_soft", h.tau_soft);
        h.reward_c = cfg.get_double("reward_c", h.reward_c);
        h.hidden_sizes = {static_cast<int>(cfg.get_int("hidden1", h.hidden_sizes[0])),
                          static_cast<int>(cfg.get_int("hidden2", h.hidden_sizes[1]))};
        h.noise_type = cfg.get_str("noise_type", h.noise_type);
        h.ou_theta = cfg.get_double("ou_theta", h.ou_theta);
        h.ou_sigma = cfg.get_double("ou_sigma", h.ou_sigma);
        h.ou_dt = cfg.get_double("ou_dt", h.ou_dt);
        h.gaussian_sigma = cfg.get_double("gaussian_sigma", h.gaussian_sigma);
        h.action_amplitude = cfg.get_double("amplitude", h.action_amplitude);
        h.actor_final_scale = cfg.get_double("actor_final_scale", h.actor_final_scale);
        h.threads = static_cast<int>(cfg.get_int("threads", h.threads));
        h.validate();
        return h;
    }

    NoiseProcess make_noise(int act_dim) const {
        const auto kind = NoiseProcess::kind_from_name(noise_type);
        const double sigma = (kind == NoiseProcess::Kind::kOrnsteinUhlenbeck ? ou_sigma
                                                                             : gaussian_sigma) *
                             action_amplitude;
        return NoiseProcess(kind, act_dim, sigma, ou_theta, ou_dt);
    }
};

// Deterministic actor-critic learner with target networks. The actor output
// is tanh-squashed and scaled by the action amplitude; the critic sees the
// action concatenated into its first layer.
class DdpgAgent {
  public:
    DdpgAgent(int obs_dim, int act_dim, const DdpgHyper& hyper, Rng& init_rng)
        : hyper_(hyper), obs_dim_(obs_dim), act_dim_(act_dim) {
        hyper_.validate();
        std::vector<int> actor_sizes{obs_dim};
        actor_sizes.insert(actor_sizes.end(), hyper_.hidden_sizes.begin(), hyper_.hidden_sizes.end());
        actor_sizes.push_back(act_dim);
        std::vector<int> critic_sizes{obs_dim + act_dim};
        critic_sizes.insert(critic_sizes.end(), hyper_.hidden_sizes.begin(), hyper_.hidden_sizes.end());
        critic_sizes.push_back(1);

        actor_ = Mlp(actor_sizes, true, Activation::kTanh, Activation::kTanh);
        critic_ = Mlp(critic_sizes, true, Activation::kTanh, Activation::kIdentity);
        actor_.init_uniform_fanin(init_rng);
        critic_.init_uniform_fanin(init_rng);
        // Near-zero initial correction so the learner starts out invisible on
        // top of the working feedback controller.
        actor_.scale_output_layer(hyper_.actor_final_scale);
        actor_target_ = actor_;
        critic_target_ = critic_;

        actor_opt_ = Adam(actor_.params().size(), hyper_.actor_lr, 0.0);
        critic_opt_ = Adam(critic_.params().size(), hyper_.critic_lr, hyper_.weight_decay);
        if (hyper_.threads > 1) pool_ = std::make_unique<WorkerPool>(hyper_.threads);
    }

    int observation_dim() const { return obs_dim_; }
    int action_dim() const { return act_dim_; }
    const DdpgHyper& hyper() const { return hyper_; }

    std::vector<double> actor_forward(const std::vector<double>& s) const {
        return scale_action(actor_.forward(s));
    }

    double critic_forward(const std::vector<double>& s, const std::vector<double>& a) const {
        return critic_.forward(concat(s, a))[0];
    }

    std::vector<double> target_action(const std::vector<double>& s) const {
        return scale_action(actor_target_.forward(s));
    }

    double target_q(const std::vector<double>& s, const std::vector<double>& a) const {
        return critic_target_.forward(concat(s, a))[0];
    }

    // Mean squared TD error against the target networks and its gradient in
    // the critic parameters. Terminal transitions drop the bootstrap term.
    std::pair<double, std::vector<double>> critic_loss_gradient(
        const std::vector<const Transition*>& batch) const {
        const std::size_t n = batch.size();
        if (n == 0) throw ConfigError("critic_loss_gradient: empty batch");
        const int stripes = grad_stripes(n);
        std::vector<std::vector<double>> grads(stripes,
                                               std::vector<double>(critic_.params().size(), 0.0));
        std::vector<double> losses(stripes, 0.0);

        parallel_stripes(stripes, [&](int stripe) {
            Mlp::Cache cache;
            for (std::size_t i = stripe; i < n; i += stripes) {
                const Transition& tr = *batch[i];
                check_shapes(tr);
                double y = tr.r;
                if (!tr.done)
                    y += hyper_.gamma * target_q(tr.s_next, target_action(tr.s_next));
                const double q = critic_.forward_cached(concat(tr.s, tr.a), cache)[0];
                const double err = q - y;
                losses[stripe] += err * err / static_cast<double>(n);
                critic_.backward(cache, {2.0 * err / static_cast<double>(n)}, &grads[stripe],
                                 nullptr);
            }
        });

        double loss = 0.0;
        for (int s = 0; s < stripes; ++s) loss += losses[s];
        reduce_stripes(grads);
        return {loss, std::move(grads[0])};
    }

    // Mean of Q(s_i, mu(s_i)) and its gradient in the actor parameters. The
    // gradient flows through the critic's action input; critic weights are
    // only read.
    std::pair<double, std::vector<double>> actor_objective_gradient(
        const std::vector<const Transition*>& batch) const {
        const std::size_t n = batch.size();
        if (n == 0) throw ConfigError("actor_objective_gradient: empty batch");
        const int stripes = grad_stripes(n);
        std::vector<std::vector<double>> grads(stripes,
                                               std::vector<double>(actor_.params().size(), 0.0));
        std::vector<double> objectives(stripes, 0.0);

        parallel_stripes(stripes, [&](int stripe) {
            Mlp::Cache actor_cache;
            Mlp::Cache critic_cache;
            for (std::size_t i = stripe; i < n; i += stripes) {
                const Transition& tr = *batch[i];
                check_shapes(tr);
                const std::vector<double> raw = actor_.forward_cached(tr.s, actor_cache);
                const std::vector<double> action = scale_action(raw);
                const double q = critic_.forward_cached(concat(tr.s, action), critic_cache)[0];
                objectives[stripe] += q / static_cast<double>(n);

                std::vector<double> dinput;
                critic_.backward(critic_cache, {1.0 / static_cast<double>(n)}, nullptr, &dinput);
                // dJ/d(raw actor output) = dJ/d(action) * amplitude
                std::vector<double> dout(act_dim_);
                for (int j = 0; j < act_dim_; ++j)
                    dout[j] = dinput[obs_dim_ + j] * hyper_.action_amplitude;
                actor_.backward(actor_cache, dout, &grads[stripe], nullptr);
            }
        });

        double objective = 0.0;
        for (int s = 0; s < stripes; ++s) objective += objectives[s];
        reduce_stripes(grads);
        return {objective, std::move(grads[0])};
    }

    // One Adam step on the TD loss. Returns the pre-step loss.
    double critic_update(const std::vector<const Transition*>& batch) {
        auto [loss, grad] = critic_loss_gradient(batch);
        if (!std::isfinite(loss)) throw NonFiniteLoss("critic loss is not finite");
        critic_opt_.step(critic_.params(), grad);
        check_finite(critic_.params(), "critic");
        return loss;
    }

    // One Adam ascent step on the mean Q objective. Returns the pre-step
    // objective.
    double actor_update(const std::vector<const Transition*>& batch) {
        auto [objective, grad] = actor_objective_gradient(batch);
        if (!std::isfinite(objective)) throw NonFiniteLoss("actor objective is not finite");
        // ascent: Adam minimizes, so feed the negated gradient
        for (double& g : grad) g = -g;
        actor_opt_.step(actor_.params(), grad);
        check_finite(actor_.params(), "actor");
        return objective;
    }

    // theta_target <- tau * theta + (1 - tau) * theta_target, elementwise.
    static void soft_update(Mlp& target, const Mlp& online, double tau) {
        auto& tp = target.params();
        const auto& op = online.params();
        if (tp.size() != op.size()) throw ShapeMismatch("soft_update: parameter count mismatch");
        for (std::size_t i = 0; i < tp.size(); ++i) tp[i] = tau * op[i] + (1.0 - tau) * tp[i];
    }

    void soft_update_targets() {
        soft_update(actor_target_, actor_, hyper_.tau_soft);
        soft_update(critic_target_, critic_, hyper_.tau_soft);
    }

    // Exploratory action: mu(s) plus process noise, clipped to the amplitude.
    std::vector<double> select_action(const std::vector<double>& s, NoiseProcess& noise, Rng& rng) const {
        std::vector<double> a = actor_forward(s);
        const std::vector<double>& n = noise.sample(rng);
        for (int j = 0; j < act_dim_; ++j)
            a[j] = std::clamp(a[j] + n[j], -hyper_.action_amplitude, hyper_.action_amplitude);
        return a;
    }

    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    Mlp& actor_target() { return actor_target_; }
    Mlp& critic_target() { return critic_target_; }
    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& actor_target() const { return actor_target_; }
    const Mlp& critic_target() const { return critic_target_; }
    Adam& actor_opt() { return actor_opt_; }
    Adam& critic_opt() { return critic_opt_; }
    const Adam& actor_opt() const { return actor_opt_; }
    const Adam& critic_opt() const { return critic_opt_; }

  private:
    std::vector<double> scale_action(std::vector<double> raw) const {
        for (double& v : raw) v *= hyper_.action_amplitude;
        return raw;
    }

    std::vector<double> concat(const std::vector<double>& s, const std::vector<double>& a) const {
        std::vector<double> x;
        x.reserve(s.size() + a.size());
        x.insert(x.end(), s.begin(), s.end());
        x.insert(x.end(), a.begin(), a.end());
        return x;
    }

    void check_shapes(const Transition& tr) const {
        if (static_cast<int>(tr.s.size()) != obs_dim_ ||
            static_cast<int>(tr.s_next.size()) != obs_dim_ ||
            static_cast<int>(tr.a.size()) != act_dim_)
            throw ShapeMismatch("transition dimensions do not match the agent");
    }

    static void check_finite(const std::vector<double>& params, const char* name) {
        for (double p : params)
            if (!std::isfinite(p)) throw NonFiniteLoss(std::string(name) + " parameters became non-finite");
    }

    // Gradients accumulate into a fixed number of stripes regardless of the
    // thread count, then reduce in stripe order: results are bit-identical
    // for any threading configuration.
    static int grad_stripes(std::size_t batch) { return batch < 8 ? static_cast<int>(batch) : 8; }

    void parallel_stripes(int stripes, const std::function<void(int)>& fn) const {
        if (pool_ && stripes > 1) {
            pool_->run(stripes, fn);
        } else {
            for (int s = 0; s < stripes; ++s) fn(s);
        }
    }

    static void reduce_stripes(std::vector<std::vector<double>>& grads) {
        for (std::size_t s = 1; s < grads.size(); ++s)
            for (std::size_t i = 0; i < grads[0].size(); ++i) grads[0][i] += grads[s][i];
    }

    DdpgHyper hyper_;
    int obs_dim_;
    int act_dim_;
    Mlp actor_;
    Mlp critic_;
    Mlp actor_target_;
    Mlp critic_target_;
    Adam actor_opt_;
    Adam critic_opt_;
    mutable std::unique_ptr<WorkerPool> pool_;
};

// Abstract training environment. `done` marks absorbing failures (used for
// bootstrap masking); `episode_end` additionally covers truncations such as
// a met recovery hold or the horizon.
class Environment {
  public:
    virtual ~Environment() = default;
    virtual int observation_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual std::vector<double> reset(Rng& rng) = 0;

    struct StepResult {
        std::vector<double> obs;
        double reward = 0.0;
        bool done = false;
        bool episode_end = false;
    };
    virtual StepResult step(const std::vector<double>& action) = 0;
};

struct EpisodeStats {
    int episode = 0;
    double ret = 0.0;  // undiscounted return
    int steps = 0;
    double mean_critic_loss = 0.0;
    double mean_actor_objective = 0.0;
};

struct TrainResult {
    std::vector<EpisodeStats> curve;
    std::string final_rng_state;
};

// Off-policy training loop: act with exploration noise, store, sample a
// minibatch, update critic then actor, then soft-update both targets, every
// step once the buffer can fill a minibatch.
inline TrainResult train(Environment& env, DdpgAgent& agent, ReplayBuffer& buffer, Rng& rng,
                         int episodes, int max_steps_per_episode) {
    TrainResult result;
    NoiseProcess noise = agent.hyper().make_noise(env.action_dim());
    const int warmup = agent.hyper().minibatch;

    for (int ep = 0; ep < episodes; ++ep) {
        noise.reset();
        std::vector<double> s = env.reset(rng);
        EpisodeStats stats;
        stats.episode = ep;
        double loss_sum = 0.0;
        double obj_sum = 0.0;
        int updates = 0;

        for (int t = 0; t < max_steps_per_episode; ++t) {
            const std::vector<double> a = agent.select_action(s, noise, rng);
            const Environment::StepResult sr = env.step(a);
            buffer.push(Transition{s, a, sr.reward, sr.obs, sr.done});
            stats.ret += sr.reward;
            ++stats.steps;

            if (buffer.size() >= static_cast<std::size_t>(warmup)) {
                const auto batch = buffer.sample(rng, static_cast<std::size_t>(agent.hyper().minibatch));
                loss_sum += agent.critic_update(batch);
                obj_sum += agent.actor_update(batch);
                agent.soft_update_targets();
                ++updates;
            }

            s = sr.obs;
            if (sr.episode_end) break;
        }
        if (updates > 0) {
            stats.mean_critic_loss = loss_sum / updates;
            stats.mean_actor_objective = obj_sum / updates;
        }
        result.curve.push_back(stats);
    }
    result.final_rng_state = rng.serialize();
    return result;
}

}  // namespace ballbot::ddpg
