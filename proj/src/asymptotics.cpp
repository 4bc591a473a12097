#include "spinbath/asymptotics.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

constexpr double pole_tol = 1e-8;

void check_domain(double z, double d) {
    if (!(d > 1.0)) throw DomainError("power law requires d > 1");
    if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("z must be positive and finite");
}

// x = z^{1/d}; the poles sit at integer x.
void check_pole(double x) {
    const double k = std::round(x);
    if (k >= 1.0 && std::abs(x - k) < pole_tol * std::max(1.0, k)) {
        throw PoleError("Pick function evaluated at a pole", static_cast<std::size_t>(k));
    }
}

double binet_kernel(double t) {
    if (t < 1e-2) {
        const double t2 = t * t;
        return t * (1.0 / 12.0 - t2 * (1.0 / 720.0 - t2 / 30240.0));
    }
    return 1.0 / std::expm1(t) - 1.0 / t + 0.5;
}

std::complex<double> binet_integral(std::complex<double> u) {
    boost::math::quadrature::exp_sinh<double> integrator;
    const double tol = 1e-14;
    auto re = [&](double t) { return binet_kernel(t) * std::exp(-u.real() * t) * std::cos(u.imag() * t); };
    auto im = [&](double t) { return -binet_kernel(t) * std::exp(-u.real() * t) * std::sin(u.imag() * t); };
    double err_re = 0.0, err_im = 0.0;
    const double r = integrator.integrate(re, tol, &err_re);
    const double i = u.imag() == 0.0 ? 0.0 : integrator.integrate(im, tol, &err_im);
    if (!std::isfinite(r) || !std::isfinite(i) || err_re > 1e-12 || err_im > 1e-12) {
        throw QuadratureError("Binet integral did not converge");
    }
    return {r, i};
}

// Σ_{k>N} k^{-s}
double zeta_tail(double s, double n) {
    const double ns = std::pow(n, -s);
    return n * ns / (s - 1.0) - 0.5 * ns + s * ns / (12.0 * n) -
           s * (s + 1.0) * (s + 2.0) * ns / (720.0 * n * n * n);
}

} // namespace

double cubic_remainder(double w) {
    if (!(w > 0.0)) throw DomainError("cubic_remainder: w must be positive");
    const std::complex<double> omega{-0.5, std::sqrt(3.0) / 2.0};
    const auto j0 = binet_integral({w, 0.0});
    const auto j1 = binet_integral(-omega * w);
    return j0.real() + 2.0 * (omega * j1).real();
}

double pick_pole_sum(double z, double gamma, double d, std::size_t terms) {
    check_domain(z, d);
    check_pole(std::pow(z, 1.0 / d));
    // The tail expansion in z/k^d needs z well below N^d.
    const auto floor_n = static_cast<std::size_t>(std::ceil(std::pow(4.0 * z, 1.0 / d))) + 10;
    const std::size_t n = std::max(terms, floor_n);

    double sum = 0.0, comp = 0.0;   // Kahan
    for (std::size_t k = n; k >= 1; --k) {
        const double term = 1.0 / (z - std::pow(static_cast<double>(k), d)) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    // Σ_{k>N} 1/(z − k^d) = −Σ_j z^j Σ_{k>N} k^{−d(j+1)}
    double tail = 0.0;
    double zj = 1.0;
    const double nd = static_cast<double>(n);
    for (int j = 0; j < 200; ++j) {
        const double term = zj * zeta_tail(d * (j + 1), nd);
        tail -= term;
        if (std::abs(term) < 1e-19 * std::max(1.0, std::abs(tail))) break;
        zj *= z;
    }
    return gamma - 1.0 / z - (sum + tail);
}

double closed_form_pick(double z, double gamma, double d) {
    check_domain(z, d);
    if (d == 2.0) {
        const double x = std::sqrt(z);
        check_pole(x);
        return gamma - 0.5 / z - M_PI / (2.0 * x * std::tan(M_PI * x));
    }
    if (d == 4.0) {
        const double w = std::pow(z, 0.25);
        check_pole(w);
        const double w3 = w * w * w;
        return gamma - 0.5 / z - M_PI / (4.0 * w3 * std::tan(M_PI * w)) -
               M_PI / (4.0 * w3 * std::tanh(M_PI * w));
    }
    if (d == 3.0) {
        const double w = std::cbrt(z);
        check_pole(w);
        const double w2 = w * w;
        return gamma - 0.5 / z - M_PI / (3.0 * w2 * std::tan(M_PI * w)) -
               M_PI / (std::sqrt(27.0) * w2) + cubic_remainder(w) / (3.0 * w2);
    }
    return pick_pole_sum(z, gamma, d);
}

NormCoefficients norm_coefficients(const AsymptoticParams& p) {
    if (!(p.d > 1.0)) throw DomainError("norm_coefficients: d must exceed 1");
    NormCoefficients c;
    c.gamma_sq = p.gamma * p.gamma;
    if (p.d == 2.0) {
        c.beta = M_PI * M_PI / 4.0 - p.gamma / 2.0;
    } else if (p.d == 3.0) {
        c.beta = 4.0 * M_PI * M_PI / 27.0;
    } else if (p.d == 4.0) {
        c.beta = M_PI * M_PI / 8.0;
    } else {
        c.beta = 8.0 / (p.d * p.d);
        c.approximate = true;
    }
    return c;
}

LongTimeValue long_time_pq(double t, const AsymptoticParams& p, double excess) {
    if (!(t > 0.0)) throw DomainError("long_time_pq: t must be positive");
    if (!(p.a > 0.0)) throw DomainError("long_time_pq: a must be positive");
    const double at = p.a * t;
    const double d = p.d;
    LongTimeValue out;
    out.early = std::pow(at, 1.0 / d) < 3.0;
    const double decay = std::exp(-p.gamma_t * t);
    if (p.gamma == 0.0) {
        const double beta = norm_coefficients(p).beta;
        out.value = boost::math::tgamma(1.0 + 1.0 / d) / beta * decay * std::pow(at, -1.0 / d) * excess;
    } else {
        const double g2 = p.gamma * p.gamma;
        out.value = boost::math::tgamma(2.0 - 1.0 / d) / (g2 * d) * decay *
                    std::pow(at, -(2.0 - 1.0 / d)) * excess;
    }
    return out;
}

double approx_roots(std::size_t m, double gamma, double d) {
    if (!(d > 1.0)) throw DomainError("approx_roots: d must exceed 1");
    const double lo = std::pow(static_cast<double>(m), d);
    const double hi = std::pow(static_cast<double>(m + 1), d);
    const double h = 0.5 * (hi - lo);
    // (A+B)/2 + 1/γ − sgn(γ)·sqrt(h² + 1/γ²), rearranged to stay finite at γ = 0.
    return 0.5 * (lo + hi) - h * h * gamma / (1.0 + std::sqrt(1.0 + h * h * gamma * gamma));
}

double root_deviation(double z, double d, std::size_t m) {
    return std::pow(z, 1.0 / d) - static_cast<double>(m) - 0.5;
}

} // namespace spinbath
