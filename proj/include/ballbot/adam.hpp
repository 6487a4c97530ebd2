#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ballbot/errors.hpp"

namespace ballbot::ddpg {

// Adam with optional coupled L2 weight decay (the decay term joins the raw
// gradient before the moment updates).
class Adam {
  public:
    Adam() = default;

    Adam(std::size_t n_params, double lr, double weight_decay = 0.0, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps),
          m_(n_params, 0.0), v_(n_params, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grad) {
        if (params.size() != m_.size() || grad.size() != m_.size())
            throw ShapeMismatch("Adam: parameter/gradient size mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grad[i] + weight_decay_ * params[i];
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }

    double learning_rate() const { return lr_; }
    double weight_decay() const { return weight_decay_; }
    double beta1() const { return beta1_; }
    double beta2() const { return beta2_; }
    double eps() const { return eps_; }
    std::int64_t step_count() const { return t_; }
    std::vector<double>& first_moment() { return m_; }
    std::vector<double>& second_moment() { return v_; }
    const std::vector<double>& first_moment() const { return m_; }
    const std::vector<double>& second_moment() const { return v_; }
    void restore(std::vector<double> m, std::vector<double> v, std::int64_t t) {
        m_ = std::move(m);
        v_ = std::move(v);
        t_ = t;
    }

  private:
    double lr_ = 1e-4;
    double weight_decay_ = 0.0;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::int64_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

}  // namespace ballbot::ddpg
