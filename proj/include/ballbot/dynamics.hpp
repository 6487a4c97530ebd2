#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "ballbot/errors.hpp"
#include "ballbot/params.hpp"

namespace ballbot::dynamics {

// Generalized coordinates for one decoupled plane. theta is the ball rotation
// angle (ball travel x = r_b * theta), phi the body lean angle. The upright
// equilibrium is the all-zero state.
struct PlanarState {
    double theta = 0.0;
    double phi = 0.0;
    double theta_dot = 0.0;
    double phi_dot = 0.0;

    // Physical lean of the body from vertical; the potential energy depends
    // on this combination alone.
    double lean() const { return theta + phi; }
    double lean_rate() const { return theta_dot + phi_dot; }

    Eigen::Vector4d vec() const { return {theta, phi, theta_dot, phi_dot}; }

    static PlanarState from_vec(const Eigen::Vector4d& x) {
        return {x[0], x[1], x[2], x[3]};
    }

    bool finite() const {
        return std::isfinite(theta) && std::isfinite(phi) && std::isfinite(theta_dot) &&
               std::isfinite(phi_dot);
    }
};

// |c| threshold below which the acceleration denominator counts as singular.
// At default-scale parameters |c| is O(0.1..1), so this only flags genuine
// degeneracy.
inline constexpr double kSingularEps = 1e-9;

inline Eigen::Matrix2d mass_matrix(const PhysicalParams& p, const PlanarState& s) {
    const double c = std::cos(s.theta + s.phi);
    const double k = p.m_B * p.r_b * p.l;
    Eigen::Matrix2d m;
    m(0, 0) = p.gamma1() + 2.0 * k * c;
    m(0, 1) = p.gamma2() + k * c;
    m(1, 0) = m(0, 1);
    m(1, 1) = p.gamma2();
    return m;
}

inline Eigen::Vector2d coriolis(const PhysicalParams& p, const PlanarState& s) {
    const double w = s.theta_dot + s.phi_dot;
    return {-p.m_B * p.r_b * p.l * std::sin(s.theta + s.phi) * w * w, 0.0};
}

inline Eigen::Vector2d gravity(const PhysicalParams& p, const PlanarState& s) {
    const double gterm = -p.m_B * p.g * p.l * std::sin(s.theta + s.phi);
    return {gterm, gterm};
}

inline Eigen::Vector2d viscous_friction(const PhysicalParams& p, const PlanarState& s) {
    return {p.mu_theta * s.theta_dot, p.mu_phi * s.phi_dot};
}

// Closed-form accelerations [theta_ddot, phi_ddot] for input torque tau
// (applied between ball and body). Throws SingularMass when the shared
// denominator collapses.
inline Eigen::Vector2d forward_dynamics(const PhysicalParams& p, const PlanarState& s, double tau) {
    const double sig = s.theta + s.phi;
    const double sn = std::sin(sig);
    const double cs = std::cos(sig);
    const double k = p.m_B * p.r_b * p.l;
    const double g2 = p.gamma2();
    const double w = s.theta_dot + s.phi_dot;

    const double a = p.m_B * p.g * p.l * sn - p.mu_theta * s.theta_dot + k * sn * w * w;
    const double b = tau - p.mu_phi * s.phi_dot + p.m_B * p.g * p.l * sn;
    const double c = g2 * g2 - p.gamma1() * g2 + k * k * cs * cs;
    if (std::abs(c) <= kSingularEps)
        throw SingularMass("acceleration denominator ~ 0 (|c| = " + std::to_string(std::abs(c)) + ")");

    const double theta_ddot = (b * (g2 + k * cs) - a * g2) / c;
    const double phi_ddot = (a * (g2 + k * cs) - b * (p.gamma1() + 2.0 * k * cs)) / c;
    return {theta_ddot, phi_ddot};
}

// Same accelerations computed by explicitly inverting the 2x2 mass matrix.
// Kept as an independent route; the closed form above must match it.
inline Eigen::Vector2d forward_dynamics_mass_solve(const PhysicalParams& p, const PlanarState& s,
                                                   double tau) {
    const Eigen::Matrix2d m = mass_matrix(p, s);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (std::abs(det) <= kSingularEps) throw SingularMass("mass matrix determinant ~ 0");
    const Eigen::Vector2d rhs =
        Eigen::Vector2d{0.0, tau} - coriolis(p, s) - gravity(p, s) - viscous_friction(p, s);
    Eigen::Matrix2d inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv * rhs / det;
}

// Kinetic plus potential energy. The potential reference is the ball center,
// so the zero state carries m_B * g * l.
inline double total_energy(const PhysicalParams& p, const PlanarState& s) {
    const double td = s.theta_dot;
    const double pd = s.phi_dot;
    const double cs = std::cos(s.theta + s.phi);
    const double k_ball = 0.5 * p.I_b * td * td + 0.5 * p.m_b * (p.r_b * td) * (p.r_b * td);
    const double k_body = 0.5 * p.m_B *
                              (p.r_b * p.r_b * td * td +
                               2.0 * p.r_b * p.l * (td * td + td * pd) * cs +
                               p.l * p.l * (td + pd) * (td + pd)) +
                          0.5 * p.I_B * (td + pd) * (td + pd);
    const double v_body = p.m_B * p.g * p.l * cs;
    return k_ball + k_body + v_body;
}

// Continuous-time state-space model about the upright equilibrium,
// x = [theta, phi, theta_dot, phi_dot], u = tau.
struct LinearModel {
    Eigen::Matrix4d a;
    Eigen::Vector4d b;
    Eigen::Matrix4d c;  // identity output
    Eigen::Vector4d d;  // zero feedthrough
};

inline LinearModel linearize(const PhysicalParams& p) {
    const double h = p.h_denom();
    if (h == 0.0) throw SingularMass("linearization denominator H = 0");
    const double k = p.m_B * p.r_b * p.l;
    const double f = p.gamma2() + k;
    const double gcoef = p.gamma1() + 2.0 * k;
    const double mgl = p.m_B * p.g * p.l;

    LinearModel lm;
    lm.a.setZero();
    lm.a(0, 2) = 1.0;
    lm.a(1, 3) = 1.0;
    lm.a(2, 0) = lm.a(2, 1) = mgl * k / h;
    lm.a(2, 2) = p.mu_theta * p.gamma2() / h;
    lm.a(2, 3) = -p.mu_phi * f / h;
    lm.a(3, 0) = lm.a(3, 1) = mgl * (f - gcoef) / h;
    lm.a(3, 2) = -p.mu_theta * f / h;
    lm.a(3, 3) = p.mu_phi * gcoef / h;

    lm.b.setZero();
    lm.b(2) = f / h;
    lm.b(3) = -gcoef / h;

    lm.c.setIdentity();
    lm.d.setZero();
    return lm;
}

}  // namespace ballbot::dynamics
