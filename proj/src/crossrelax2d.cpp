#include "spinbath/crossrelax2d.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

using cd = std::complex<double>;

void check(const ManifoldParams& p) {
    if (!(p.gamma2 > 0.0) || !std::isfinite(p.gamma2)) throw DomainError("Γ₂ must be positive");
    if (!(p.g >= 0.0) || !std::isfinite(p.g)) throw DomainError("g must be non-negative");
    if (!std::isfinite(p.delta)) throw DomainError("δ must be finite");
}

struct Coeffs {
    double p, q;
};

Coeffs coefficients(const ManifoldParams& m) {
    const double r = 1.0 / m.gamma2;
    const double g = 2.0 * m.g * r;
    const double d = m.delta * r;
    return {1.0 + g * g + d * d, g * g};
}

template <class T>
T poly(T mu, const Coeffs& c) {
    return ((mu - 2.0) * mu + c.p) * mu - c.q;
}

template <class T>
T dpoly(T mu, const Coeffs& c) {
    return (3.0 * mu - 4.0) * mu + c.p;
}

template <class T>
T polish(T mu, const Coeffs& c) {
    for (int i = 0; i < 8; ++i) {
        const T d = dpoly(mu, c);
        if (d == T{}) break;
        const T next = mu - poly(mu, c) / d;
        if (next == mu) break;
        mu = next;
    }
    return mu;
}

double discriminant(const Coeffs& c) {
    const double P = c.p - 4.0 / 3.0;
    const double Q = -16.0 / 27.0 + 2.0 * c.p / 3.0 - c.q;
    return 4.0 * P * P * P + 27.0 * Q * Q;
}

} // namespace

Eigen::Matrix3d bloch_generator(const ManifoldParams& p) {
    check(p);
    Eigen::Matrix3d m;
    m << p.gamma2, p.delta, 0.0,
        -p.delta, p.gamma2, 2.0 * p.g,
        0.0, -2.0 * p.g, 0.0;
    return -m;
}

CubicRoots cubic_roots(const ManifoldParams& params) {
    check(params);
    const Coeffs c = coefficients(params);
    CubicRoots out;
    out.discriminant = discriminant(c);

    if (params.g == 0.0) {
        // μ(μ² − 2μ + p): μ0 = 0, μ1,2 = 1 ± iδ/Γ₂
        const double im = std::abs(params.delta) / params.gamma2;
        out.mu = {cd{0.0}, cd{1.0, im}, cd{1.0, -im}};
        if (im == 0.0) out.discriminant = 0.0;
        return out;
    }

    const double P = c.p - 4.0 / 3.0;
    const double Q = -16.0 / 27.0 + 2.0 * c.p / 3.0 - c.q;
    double mu0;
    std::array<double, 3> real{};
    if (out.discriminant > 0.0) {
        const double s = std::sqrt(out.discriminant / 108.0);
        const double y = std::cbrt(-0.5 * Q + s) + std::cbrt(-0.5 * Q - s);
        mu0 = polish(y + 2.0 / 3.0, c);
        // Deflate: μ² + Bμ + C with B = μ0 − 2, C = p − μ0(2 − μ0).
        const double b = mu0 - 2.0;
        const double cc = c.p + mu0 * b;
        const double re = -0.5 * b;
        const double im = std::sqrt(std::max(0.0, cc - re * re));
        out.mu = {cd{mu0}, cd{re, im}, cd{re, -im}};
        return out;
    }

    const double r = 2.0 * std::sqrt(std::max(0.0, -P / 3.0));
    double arg = r > 0.0 ? (3.0 * Q / (P * r)) : 0.0;   // = (3Q/2P)·sqrt(−3/P)
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
        real[k] = polish(r * std::cos(phi - 2.0 * M_PI * k / 3.0) + 2.0 / 3.0, c);
    }
    std::sort(real.begin(), real.end());
    out.mu = {cd{real[0]}, cd{real[1]}, cd{real[2]}};
    return out;
}

double mu0_first_order(const ManifoldParams& p) {
    check(p);
    const double g2 = 4.0 * p.g * p.g;
    return g2 / (p.gamma2 * p.gamma2 + g2 + p.delta * p.delta);
}

ZTrajectory z_of_t(const ManifoldParams& p, double x0, double y0, double z0,
                   std::span<const double> times) {
    check(p);
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("z_of_t: times must be >= 0");
    }
    const CubicRoots roots = cubic_roots(p);
    const auto& mu = roots.mu;
    double min_gap = std::abs(mu[0] - mu[1]);
    min_gap = std::min({min_gap, std::abs(mu[0] - mu[2]), std::abs(mu[1] - mu[2])});

    ZTrajectory out;
    out.z.resize(times.size());
    if (min_gap < 1e-6) {
        out.fallback = true;
        const Eigen::Matrix3d m = bloch_generator(p);
        const Eigen::Vector3d v0(x0, y0, z0);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const Eigen::Matrix3d e = (m * times[i]).exp();
            out.z[i] = (e * v0)(2);
        }
        return out;
    }

    // Residues of N(s)/P(s) at s_i = −μ_i Γ₂, with
    // N(s) = 2gδx0 + 2g(s + Γ₂)y0 + ((s + Γ₂)² + δ²)z0.
    const double g2 = p.gamma2;
    std::array<cd, 3> weight;
    for (int i = 0; i < 3; ++i) {
        const cd s = -mu[i] * g2;
        const cd sp = s + g2;
        const cd num = 2.0 * p.g * p.delta * x0 + 2.0 * p.g * sp * y0 + (sp * sp + p.delta * p.delta) * z0;
        cd den = g2 * g2;
        for (int j = 0; j < 3; ++j) {
            if (j != i) den *= (mu[j] - mu[i]);
        }
        weight[i] = num / den;
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        cd z{};
        for (int i = 0; i < 3; ++i) z += weight[i] * std::exp(-mu[i] * g2 * times[k]);
        out.z[k] = z.real();
    }
    return out;
}

double relaxation_area(const ManifoldParams& p, double x0, double y0, double z0) {
    check(p);
    if (p.g == 0.0) throw DomainError("relaxation_area: z does not relax for g = 0");
    const double g2 = p.gamma2;
    return (p.delta * x0 + g2 * y0) / (2.0 * p.g * g2) +
           (p.delta * p.delta + g2 * g2) / (4.0 * p.g * p.g * g2) * z0;
}

CoherentFraction coherent_fraction(const ManifoldParams& p, double z0, double z_max) {
    check(p);
    if (!(z_max >= std::abs(z0))) throw DomainError("coherent_fraction: |z0| must not exceed z_max");
    const CubicRoots r = cubic_roots(p);
    const double mu0 = r.mu[0].real();
    CoherentFraction out;
    if (p.g == 0.0) {
        out.area = std::numeric_limits<double>::infinity();
        return out;
    }
    // (μ1 + μ2)/(μ1μ2) is real for both real and conjugate pairs.
    const cd s = r.mu[1] + r.mu[2];
    const cd prod = r.mu[1] * r.mu[2];
    out.epsilon = mu0 * ((s / prod).real() - 1.0);
    out.area = relaxation_area(p, 0.0, 0.0, z0);
    out.z_eff = mu0 * std::sqrt(z_max * z_max - z0 * z0) * std::hypot(p.gamma2, p.delta) / (2.0 * p.g);
    return out;
}

ValidityMap validity_map(double g, std::span<const double> gamma2_grid,
                         std::span<const double> delta_grid) {
    if (!(g > 0.0)) throw DomainError("validity_map: g must be positive");
    ValidityMap map;
    std::vector<double> row_d(delta_grid.size());
    for (double g2 : gamma2_grid) {
        if (!(g2 > 0.0)) throw DomainError("validity_map: Γ₂ grid must be positive");
        for (std::size_t j = 0; j < delta_grid.size(); ++j) {
            const ManifoldParams p{g, delta_grid[j], g2};
            const CubicRoots r = cubic_roots(p);
            const double mu0 = r.mu[0].real();
            ValidityCell cell;
            cell.gamma2 = g2;
            cell.delta = delta_grid[j];
            cell.epsilon = coherent_fraction(p).epsilon;
            cell.root_error = std::abs(mu0_first_order(p) - mu0) / mu0;
            cell.d_sign = r.discriminant > 0.0 ? 1 : (r.discriminant < 0.0 ? -1 : 0);
            map.cells.push_back(cell);
            row_d[j] = r.discriminant;
        }
        for (std::size_t j = 0; j + 1 < delta_grid.size(); ++j) {
            const double a = row_d[j], b = row_d[j + 1];
            if (a == 0.0) {
                map.contour.push_back({g2, delta_grid[j]});
            } else if ((a < 0.0) != (b < 0.0) && b != 0.0) {
                const double f = a / (a - b);
                map.contour.push_back({g2, delta_grid[j] + f * (delta_grid[j + 1] - delta_grid[j])});
            }
        }
        if (!delta_grid.empty() && row_d.back() == 0.0) map.contour.push_back({g2, delta_grid.back()});
    }
    return map;
}

} // namespace spinbath
