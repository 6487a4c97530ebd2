#pragma once

#include <cmath>
#include <string>

#include "ballbot/config.hpp"
#include "ballbot/errors.hpp"

namespace ballbot {

// Physical parameters of the planar ball-and-body model. SI units throughout.
//
// The shipped defaults are plausible values for a mid-size ball-balancing
// robot; they are not measurements of any particular machine.
struct PhysicalParams {
    double m_b = 3.0;       // ball mass (kg)
    double m_B = 10.0;      // body mass (kg)
    double I_b = 0.02;      // ball moment of inertia (kg m^2)
    double I_B = 1.2;       // body moment of inertia about the ball center (kg m^2)
    double r_b = 0.12;      // ball radius (m)
    double l = 0.4;         // ball center to body center of mass (m)
    double mu_theta = 0.05; // ball-ground viscous coefficient (N m s)
    double mu_phi = 0.05;   // ball-body viscous coefficient (N m s)
    double g = 9.81;        // gravity (m/s^2)

    // Lumped inertia terms reused across the model.
    double gamma1() const { return I_b + I_B + m_b * r_b * r_b + m_B * r_b * r_b + m_B * l * l; }
    double gamma2() const { return I_B + m_B * l * l; }

    // Denominator of the linearized model; must stay away from zero.
    double h_denom() const {
        const double g2 = gamma2();
        const double k = m_B * r_b * l;
        return g2 * g2 - gamma1() * g2 + k * k;
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string("physical parameter must be positive: ") + name);
        };
        positive(m_b, "m_b");
        positive(m_B, "m_B");
        positive(I_b, "I_b");
        positive(I_B, "I_B");
        positive(r_b, "r_b");
        positive(l, "l");
        positive(g, "g");
        if (mu_theta < 0.0 || mu_phi < 0.0) throw ConfigError("friction coefficients must be >= 0");
        if (!(gamma1() > gamma2())) throw ConfigError("inertia terms violate gamma1 > gamma2");
        if (h_denom() == 0.0) throw ConfigError("degenerate parameters: H = 0");
    }

    static PhysicalParams from_config(const KeyedConfig& cfg) {
        PhysicalParams p;
        p.m_b = cfg.get_double("m_b", p.m_b);
        p.m_B = cfg.get_double("m_B", p.m_B);
        p.I_b = cfg.get_double("I_b", p.I_b);
        p.I_B = cfg.get_double("I_B", p.I_B);
        p.r_b = cfg.get_double("r_b", p.r_b);
        p.l = cfg.get_double("l", p.l);
        p.mu_theta = cfg.get_double("mu_theta", p.mu_theta);
        p.mu_phi = cfg.get_double("mu_phi", p.mu_phi);
        p.g = cfg.get_double("g", p.g);
        p.validate();
        return p;
    }
};

}  // namespace ballbot
