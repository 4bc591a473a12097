// oracles.hpp: independent reference computations shared by the tests

#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

namespace oracle {

// dx/dt = A x + b by adaptive Dormand–Prince, sampled at the given times.
inline std::vector<Eigen::VectorXd> integrate_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                                     const Eigen::VectorXd& x0,
                                                     std::span<const double> times,
                                                     double abs_tol = 1e-13, double rel_tol = 1e-13) {
    using state = std::vector<double>;
    namespace ode = boost::numeric::odeint;
    const auto n = x0.size();
    auto rhs = [&](const state& x, state& dx, double) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
        Eigen::Map<Eigen::VectorXd> dv(dx.data(), n);
        dv = a * xv + b;
    };
    state x(x0.data(), x0.data() + n);
    std::vector<Eigen::VectorXd> out;
    double t = 0.0;
    auto stepper = ode::make_controlled(abs_tol, rel_tol, ode::runge_kutta_dopri5<state>());
    for (double target : times) {
        if (target > t) {
            ode::integrate_adaptive(stepper, rhs, x, t, target, (target - t) / 100.0);
            t = target;
        }
        out.push_back(Eigen::Map<const Eigen::VectorXd>(x.data(), n));
    }
    return out;
}

// Σ_{h=-n}^{n} a b²/(b² + (h − bc)²) plus the integral tail of both sides.
inline double lorentzian_sum(double a, double b, double c, long n) {
    double sum = 0.0;
    for (long h = n; h >= 1; --h) {
        const double xp = static_cast<double>(h) - b * c;
        const double xm = static_cast<double>(-h) - b * c;
        sum += a * b * b / (b * b + xp * xp) + a * b * b / (b * b + xm * xm);
    }
    sum += a * b * b / (b * b + b * c * b * c);
    // ∫_{n+1/2}^∞ of both branches (midpoint rule remainder)
    const double nh = static_cast<double>(n) + 0.5;
    sum += a * b * (M_PI / 2.0 - std::atan((nh - b * c) / b));
    sum += a * b * (M_PI / 2.0 - std::atan((nh + b * c) / b));
    return sum;
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

} // namespace oracle
