#pragma once

#include <fstream>
#include <json.hpp>
#include <string>

#include "ballbot/ddpg.hpp"

namespace ballbot::ddpg {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json net_to_json(const Mlp& net) {
    nlohmann::json j;
    std::vector<int> sizes{net.input_dim()};
    for (const auto& l : net.layers()) sizes.push_back(l.out);
    j["sizes"] = sizes;
    j["params"] = net.params();
    return j;
}

inline nlohmann::json hyper_to_json(const DdpgHyper& h) {
    return nlohmann::json{{"actor_lr", h.actor_lr},
                          {"critic_lr", h.critic_lr},
                          {"weight_decay", h.weight_decay},
                          {"minibatch", h.minibatch},
                          {"buffer_capacity", h.buffer_capacity},
                          {"gamma", h.gamma},
                          {"tau_soft", h.tau_soft},
                          {"reward_c", h.reward_c},
                          {"hidden_sizes", h.hidden_sizes},
                          {"noise_type", h.noise_type},
                          {"ou_theta", h.ou_theta},
                          {"ou_sigma", h.ou_sigma},
                          {"ou_dt", h.ou_dt},
                          {"gaussian_sigma", h.gaussian_sigma},
                          {"action_amplitude", h.action_amplitude},
                          {"actor_final_scale", h.actor_final_scale},
                          {"threads", h.threads}};
}

inline DdpgHyper hyper_from_json(const nlohmann::json& j) {
    DdpgHyper h;
    h.actor_lr = j.at("actor_lr");
    h.critic_lr = j.at("critic_lr");
    h.weight_decay = j.at("weight_decay");
    h.minibatch = j.at("minibatch");
    h.buffer_capacity = j.at("buffer_capacity");
    h.gamma = j.at("gamma");
    h.tau_soft = j.at("tau_soft");
    h.reward_c = j.at("reward_c");
    h.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
    h.noise_type = j.at("noise_type");
    h.ou_theta = j.at("ou_theta");
    h.ou_sigma = j.at("ou_sigma");
    h.ou_dt = j.at("ou_dt");
    h.gaussian_sigma = j.at("gaussian_sigma");
    h.action_amplitude = j.at("action_amplitude");
    h.actor_final_scale = j.at("actor_final_scale");
    h.threads = j.at("threads");
    return h;
}

inline nlohmann::json opt_to_json(const Adam& opt) {
    return nlohmann::json{{"m", opt.first_moment()}, {"v", opt.second_moment()}, {"t", opt.step_count()}};
}

inline void restore_params(Mlp& net, const nlohmann::json& j, const std::string& name) {
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.params().size())
        throw ConfigError("checkpoint: parameter count mismatch for " + name);
    net.params() = params;
}

}  // namespace detail

// Self-describing JSON record of the whole learner: hyperparameters, all four
// networks, both optimizer states and the training RNG state.
inline void save_checkpoint(const std::string& path, const DdpgAgent& agent,
                            const std::string& rng_state) {
    nlohmann::json j;
    j["format"] = "ballbot-ddpg-checkpoint";
    j["version"] = kCheckpointVersion;
    j["obs_dim"] = agent.observation_dim();
    j["act_dim"] = agent.action_dim();
    j["hyper"] = detail::hyper_to_json(agent.hyper());
    j["actor"] = detail::net_to_json(agent.actor());
    j["critic"] = detail::net_to_json(agent.critic());
    j["actor_target"] = detail::net_to_json(agent.actor_target());
    j["critic_target"] = detail::net_to_json(agent.critic_target());
    j["actor_opt"] = detail::opt_to_json(agent.actor_opt());
    j["critic_opt"] = detail::opt_to_json(agent.critic_opt());
    j["rng"] = rng_state;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << j.dump();
}

struct LoadedCheckpoint {
    DdpgAgent agent;
    std::string rng_state;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "ballbot-ddpg-checkpoint")
        throw ConfigError("not a ddpg checkpoint: " + path);
    if (j.at("version").get<int>() != kCheckpointVersion)
        throw ConfigError("unsupported checkpoint version in " + path);

    const DdpgHyper hyper = detail::hyper_from_json(j.at("hyper"));
    Rng dummy(0);
    DdpgAgent agent(j.at("obs_dim"), j.at("act_dim"), hyper, dummy);
    detail::restore_params(agent.actor(), j.at("actor"), "actor");
    detail::restore_params(agent.critic(), j.at("critic"), "critic");
    detail::restore_params(agent.actor_target(), j.at("actor_target"), "actor_target");
    detail::restore_params(agent.critic_target(), j.at("critic_target"), "critic_target");
    agent.actor_opt().restore(j.at("actor_opt").at("m").get<std::vector<double>>(),
                              j.at("actor_opt").at("v").get<std::vector<double>>(),
                              j.at("actor_opt").at("t").get<std::int64_t>());
    agent.critic_opt().restore(j.at("critic_opt").at("m").get<std::vector<double>>(),
                               j.at("critic_opt").at("v").get<std::vector<double>>(),
                               j.at("critic_opt").at("t").get<std::int64_t>());
    return {std::move(agent), j.value("rng", "")};
}

}  // namespace ballbot::ddpg
