#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ballbot/errors.hpp"
#include "ballbot/rng.hpp"

namespace ballbot::ddpg {

// Exploration noise added to the deterministic policy output. The
// Ornstein-Uhlenbeck process is the Euler-Maruyama discretization
//   n <- n + theta * (0 - n) * dt + sigma * sqrt(dt) * N(0,1)
// with stationary variance sigma^2 * dt / (1 - (1 - theta*dt)^2), which
// approaches sigma^2 / (2 theta) for small theta*dt.
class NoiseProcess {
  public:
    enum class Kind { kOrnsteinUhlenbeck, kGaussian };

    NoiseProcess(Kind kind, int dim, double sigma, double theta = 0.15, double dt = 0.01)
        : kind_(kind), sigma_(sigma), theta_(theta), dt_(dt), state_(dim, 0.0) {
        if (dim <= 0) throw ConfigError("noise dimension must be positive");
        if (sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
        if (kind == Kind::kOrnsteinUhlenbeck && (!(theta > 0.0) || !(dt > 0.0)))
            throw ConfigError("OU noise needs theta > 0 and dt > 0");
    }

    static Kind kind_from_name(const std::string& name) {
        if (name == "ou") return Kind::kOrnsteinUhlenbeck;
        if (name == "gaussian") return Kind::kGaussian;
        throw ConfigError("unknown noise type: " + name);
    }

    void reset() { std::fill(state_.begin(), state_.end(), 0.0); }

    const std::vector<double>& sample(Rng& rng) {
        if (kind_ == Kind::kOrnsteinUhlenbeck) {
            const double root_dt = std::sqrt(dt_);
            for (double& n : state_) n += theta_ * (0.0 - n) * dt_ + sigma_ * root_dt * rng.normal();
        } else {
            for (double& n : state_) n = sigma_ * rng.normal();
        }
        return state_;
    }

    double stationary_variance() const {
        if (kind_ == Kind::kGaussian) return sigma_ * sigma_;
        const double decay = 1.0 - theta_ * dt_;
        return sigma_ * sigma_ * dt_ / (1.0 - decay * decay);
    }

    int dim() const { return static_cast<int>(state_.size()); }

  private:
    Kind kind_;
    double sigma_;
    double theta_;
    double dt_;
    std::vector<double> state_;
};

}  // namespace ballbot::ddpg
