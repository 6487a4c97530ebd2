#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "ballbot/dynamics.hpp"
#include "ballbot/errors.hpp"

namespace ballbot::linctl {

// Row gain of the state feedback law u = -k . x.
struct GainVector {
    Eigen::Vector4d k = Eigen::Vector4d::Zero();
};

struct LqrWeights {
    Eigen::Vector4d q_diag{1.0, 100.0, 1.0, 10.0};
    double r = 1.0;

    void validate() const {
        if (!(r > 0.0)) throw ConfigError("LQR weight r must be > 0");
        if ((q_diag.array() < 0.0).any() || q_diag.maxCoeff() <= 0.0)
            throw ConfigError("LQR state weights must be >= 0 with at least one > 0");
    }
};

inline double feedback_torque(const GainVector& gain, const Eigen::Vector4d& x) {
    return -gain.k.dot(x);
}

inline Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd ctrb(n, n);
    Eigen::VectorXd col = b;
    for (Eigen::Index i = 0; i < n; ++i) {
        ctrb.col(i) = col;
        col = a * col;
    }
    return ctrb;
}

inline bool is_controllable(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(controllability_matrix(a, b));
    return lu.rank() == a.rows();
}

inline double max_real_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    return es.eigenvalues().real().maxCoeff();
}

namespace detail {

// Real coefficients c_0..c_{n-1} of the monic polynomial with the given
// (conjugate-closed) roots: s^n + c_{n-1} s^{n-1} + ... + c_0.
inline std::vector<double> monic_coefficients(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> coeffs{1.0};
    for (const auto& r : roots) {
        coeffs.push_back(0.0);
        for (std::size_t i = coeffs.size() - 1; i > 0; --i) coeffs[i] = coeffs[i] - r * coeffs[i - 1];
    }
    double scale = 0.0;
    for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
    std::vector<double> real_coeffs(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (std::abs(coeffs[i].imag()) > 1e-9 * std::max(scale, 1.0))
            throw ConfigError("pole set is not closed under conjugation");
        real_coeffs[i] = coeffs[i].real();
    }
    return real_coeffs;  // real_coeffs[0] = 1 (leading), [n] = constant term
}

// Solve A^T P + P A = -S for symmetric S via the n^2 x n^2 Kronecker system.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
    // vec(A^T P) = (I kron A^T) vec(P); vec(P A) = (A^T kron I) vec(P)
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index r = 0; r < n; ++r) {
                big(j * n + i, j * n + r) += a(r, i);  // (I kron A^T)
                big(j * n + i, r * n + i) += a(r, j);  // (A^T kron I)
            }
        }
    Eigen::VectorXd rhs(n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) rhs(j * n + i) = -s(i, j);
    const Eigen::VectorXd vp = big.fullPivLu().solve(rhs);
    Eigen::MatrixXd p(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) p(i, j) = vp(j * n + i);
    return 0.5 * (p + p.transpose());
}

}  // namespace detail

// Ackermann gain placing the closed-loop eigenvalues of (A - B K) at the
// requested conjugate-closed pole set. Single-input systems only.
inline Eigen::RowVectorXd place_poles(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                      const std::vector<std::complex<double>>& poles) {
    const Eigen::Index n = a.rows();
    if (static_cast<Eigen::Index>(poles.size()) != n)
        throw ConfigError("pole count must equal the state dimension");
    const Eigen::MatrixXd ctrb = controllability_matrix(a, b);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ctrb);
    if (lu.rank() < n) throw NotControllable("system is not controllable");

    const std::vector<double> coeffs = detail::monic_coefficients(poles);
    // Horner evaluation of the desired characteristic polynomial at A.
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 1; i < coeffs.size(); ++i) phi = phi * a + coeffs[i] * Eigen::MatrixXd::Identity(n, n);

    // K = e_n^T Ctrb^-1 phi(A)
    Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
    en(n - 1) = 1.0;
    const Eigen::VectorXd y = ctrb.transpose().fullPivLu().solve(en);
    return (y.transpose() * phi).eval();
}

// Stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0 by
// Kleinman-Newton iteration, started from a pole-placement gain.
struct CareResult {
    Eigen::MatrixXd p;
    Eigen::RowVectorXd k;  // R^-1 B^T P
    double residual_fro = 0.0;
    int iterations = 0;
};

inline CareResult solve_care(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             const Eigen::MatrixXd& q, double r) {
    const Eigen::Index n = a.rows();
    if (!(r > 0.0)) throw ConfigError("CARE input weight must be > 0");
    if (!is_controllable(a, b)) throw NotStabilizable("CARE: (A, B) not controllable");

    // Any stable pole set works as an initializer; spread them to keep the
    // initial Lyapunov solve well conditioned.
    std::vector<std::complex<double>> init_poles;
    for (Eigen::Index i = 0; i < n; ++i) init_poles.emplace_back(-1.0 - 0.5 * static_cast<double>(i), 0.0);
    Eigen::RowVectorXd k = place_poles(a, b, init_poles);

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    double prev_change = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < 100; ++iter) {
        const Eigen::MatrixXd acl = a - b * k;
        const Eigen::MatrixXd s = q + k.transpose() * r * k;
        const Eigen::MatrixXd p_next = detail::solve_lyapunov(acl, s);
        if (!p_next.allFinite()) throw NotStabilizable("CARE iteration diverged");
        const double change = (p_next - p).norm();
        p = p_next;
        k = (b.transpose() * p) / r;
        if (change < 1e-13 * std::max(1.0, p.norm()) ||
            (iter > 3 && change >= prev_change && change < 1e-9 * std::max(1.0, p.norm())))
            break;
        prev_change = change;
    }

    CareResult res;
    res.p = p;
    res.k = k;
    res.iterations = iter + 1;
    res.residual_fro =
        (a.transpose() * p + p * a - p * b * (1.0 / r) * b.transpose() * p + q).norm();
    if (res.residual_fro > 1e-8 * std::max(1.0, p.norm()))
        throw NotStabilizable("CARE residual did not converge");
    if (max_real_eigenvalue(a - b * k) >= 0.0)
        throw NotStabilizable("CARE produced an unstable closed loop");
    return res;
}

inline GainVector design_lqr(const dynamics::LinearModel& model, const LqrWeights& w) {
    w.validate();
    const Eigen::Matrix4d q = w.q_diag.asDiagonal();
    const CareResult res = solve_care(model.a, model.b, q, w.r);
    GainVector gain;
    gain.k = res.k.transpose();
    return gain;
}

inline GainVector design_pole_placement(const dynamics::LinearModel& model,
                                        const std::vector<std::complex<double>>& poles) {
    const Eigen::RowVectorXd k = place_poles(model.a, model.b, poles);
    GainVector gain;
    gain.k = k.transpose();
    return gain;
}

}  // namespace ballbot::linctl
