#include "spinbath/reduction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

std::size_t pair_tls(const BlockLiouvillian& b, std::size_t slot) {
    const auto [m, n] = b.element(slot);
    const std::size_t x = (m ^ n) & ~std::size_t{1};
    return static_cast<std::size_t>(std::countr_zero(x));
}

[[noreturn]] void throw_singular(std::size_t tls) {
    throw SingularError("coherence block is singular: qubit and TLS " + std::to_string(tls) +
                        " have zero mutual decoherence");
}

Eigen::MatrixXd take_real(const Eigen::MatrixXcd& l, double scale) {
    const double im = l.imag().cwiseAbs().maxCoeff();
    if (im > 1e-10 * scale) {
        throw Error("reduced rate equation has an imaginary residue of " + std::to_string(im));
    }
    return l.real();
}

} // namespace

double cross_relaxation_rate(double g, double gamma2, double detuning) {
    if (!(gamma2 > 0.0)) {
        throw DomainError("cross_relaxation_rate: Γ₂ must be positive; at Γ₂ = 0 the pair "
                          "oscillates coherently (see coherent_regime_check)");
    }
    if (!(g >= 0.0)) throw DomainError("cross_relaxation_rate: g must be non-negative");
    return 2.0 * g * g * gamma2 / (gamma2 * gamma2 + detuning * detuning);
}

CrossRelaxationRates cross_relaxation_rates(const SpinBathModel& model) {
    model.validate();
    CrossRelaxationRates r;
    const double g2q = model.qubit_gamma2();
    for (std::size_t k = 0; k < model.tls_count(); ++k) {
        const auto& t = model.tls[k];
        const double g2 = g2q + t.gamma2();
        const double delta = t.omega - model.omega_q;
        const double sigma = model.omega_q + t.omega;
        r.delta.push_back(delta);
        r.sigma.push_back(sigma);
        r.gamma2.push_back(g2);
        if (t.g == 0.0) {
            r.delta_rates.push_back(0.0);
            r.sigma_rates.push_back(0.0);
        } else {
            r.delta_rates.push_back(cross_relaxation_rate(t.g, g2, delta));
            r.sigma_rates.push_back(cross_relaxation_rate(t.g, g2, sigma));
        }
    }
    return r;
}

std::vector<CoherentRegimeWarning> coherent_regime_check(const SpinBathModel& model) {
    std::vector<CoherentRegimeWarning> out;
    const double g2q = model.qubit_gamma2();
    for (std::size_t k = 0; k < model.tls_count(); ++k) {
        const auto& t = model.tls[k];
        const double g2 = g2q + t.gamma2();
        const double delta = t.omega - model.omega_q;
        if (4.0 * t.g > std::hypot(g2, delta)) out.push_back({k, t.g, g2, delta});
    }
    return out;
}

RateEquation reduce_populations(const BlockLiouvillian& b, ApproximationLevel level) {
    const std::size_t nd = b.population_count();
    const Eigen::MatrixXcd gamma = b.gamma_block();
    const double scale = std::max(gamma.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    RateEquation eq;
    eq.level = level;
    eq.tls_count = b.tls_count();

    if (level == ApproximationLevel::exact_inverse) {
        const Eigen::MatrixXcd c = b.coherence_block();
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(c);
        if (!lu.isInvertible()) {
            for (std::size_t j = 0; j < b.c1_count() + b.c2_count(); ++j) {
                if (c(j, j).real() == 0.0) throw_singular(pair_tls(b, nd + j));
            }
            throw SingularError("coherence block is singular");
        }
        const Eigen::MatrixXcd x = lu.solve(b.population_to_coherence());
        eq.l_d = take_real(gamma - b.coherence_to_population() * x, scale);
        return eq;
    }

    Eigen::MatrixXcd l = gamma;
    auto fold = [&](const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& q,
                    const Eigen::MatrixXcd& p, std::size_t offset) {
        if (c.rows() == 0) return;
        if (level == ApproximationLevel::first_order) {
            Eigen::FullPivLU<Eigen::MatrixXcd> lu(c);
            if (!lu.isInvertible()) {
                for (Eigen::Index j = 0; j < c.rows(); ++j) {
                    if (c(j, j).real() == 0.0) throw_singular(pair_tls(b, offset + j));
                }
                throw SingularError("one- or two-photon coherence block is singular");
            }
            l -= p * lu.solve(q);
            return;
        }
        // Diagonal entry plus the off-diagonal column sum: the spectator losses
        // leave only the pair decoherence −Γ₂^k ± iΔ_k.
        for (Eigen::Index j = 0; j < c.rows(); ++j) {
            const cplx dj = c.col(j).sum();
            if (q.row(j).cwiseAbs().maxCoeff() == 0.0) continue;
            if (dj.real() == 0.0) throw_singular(pair_tls(b, offset + j));
            l -= p.col(j) * q.row(j) / dj;
        }
    };
    fold(b.c1(), b.r1(), b.r1_back(), nd);
    fold(b.c2(), b.r2(), b.r2_back(), nd + b.c1_count());
    eq.l_d = take_real(l, scale);
    return eq;
}

Eigen::MatrixXd solomon_transform(std::size_t tls_count) {
    const std::size_t units = tls_count + 1;
    const std::size_t dim = std::size_t{1} << units;
    std::vector<std::size_t> subsets;
    for (std::size_t j = 0; j < units; ++j) subsets.push_back(std::size_t{1} << j);
    subsets.push_back(0);
    for (std::size_t k = 1; k < dim; ++k) {
        if (std::popcount(k) >= 2) subsets.push_back(k);
    }
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & subsets[r]) == 0) s(r, i) = 1.0;
        }
    }
    return s;
}

Eigen::MatrixXd transformed_rate_matrix(const RateEquation& eq) {
    const Eigen::MatrixXd s = solomon_transform(eq.tls_count);
    if (s.rows() != eq.l_d.rows()) throw DomainError("rate equation has wrong dimension");
    // M S = S L  ->  Sᵀ Mᵀ = (S L)ᵀ
    const Eigen::MatrixXd sl = s * eq.l_d;
    return s.transpose().fullPivLu().solve(sl.transpose()).transpose();
}

ArrowheadSystem project_solomon(const RateEquation& eq) {
    const Eigen::MatrixXd m = transformed_rate_matrix(eq);
    const auto units = static_cast<Eigen::Index>(eq.tls_count + 1);
    const double scale = std::max(eq.l_d.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double tol = 1e-12 * scale;

    const auto rest = m.block(0, units + 1, units, m.cols() - units - 1);
    if (rest.size() > 0 && rest.cwiseAbs().maxCoeff() > tol) {
        throw DomainError("rate equation does not close on the populations (block right of "
                          "the drive is " + std::to_string(rest.cwiseAbs().maxCoeff()) + ")");
    }

    const Eigen::MatrixXd a = -m.topLeftCorner(units, units);
    std::vector<double> rates, gamma_t, drive;
    double rate_sum = 0.0;
    for (Eigen::Index k = 1; k < units; ++k) {
        if (std::abs(a(0, k) - a(k, 0)) > 1e-10 * scale) {
            throw DomainError("projected generator is not symmetric");
        }
        for (Eigen::Index j = 1; j < units; ++j) {
            if (j != k && std::abs(a(k, j)) > tol) {
                throw DomainError("projected generator couples TLSs directly");
            }
        }
        double r = -a(0, k);
        if (r < -tol) throw DomainError("projected cross-relaxation rate is negative");
        r = std::max(r, 0.0);
        rates.push_back(r);
        rate_sum += r;
        gamma_t.push_back(std::max(a(k, k) - r, 0.0));
    }
    for (Eigen::Index i = 0; i < units; ++i) drive.push_back(std::max(m(i, units), 0.0));
    const double gamma_q = std::max(a(0, 0) - rate_sum, 0.0);
    // Rounding can push the drive a hair above the relaxation rate.
    drive[0] = std::min(drive[0], gamma_q);
    for (std::size_t k = 0; k < rates.size(); ++k) drive[k + 1] = std::min(drive[k + 1], gamma_t[k]);
    return ArrowheadSystem::general(gamma_q, std::move(gamma_t), std::move(rates), std::move(drive));
}

ArrowheadSystem project_solomon(const SpinBathModel& model,
                                std::vector<CoherentRegimeWarning>* warnings) {
    const CrossRelaxationRates cr = cross_relaxation_rates(model);
    if (warnings) *warnings = coherent_regime_check(model);

    const std::size_t n = model.tls_count();
    double sigma_total = 0.0;
    std::vector<double> rates(n), gamma_t(n), drive(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double bar = cr.delta_rates[k] - cr.sigma_rates[k];
        if (bar < 0.0) {
            throw DomainError("TLS " + std::to_string(k + 1) +
                              ": two-photon rate exceeds the one-photon rate");
        }
        rates[k] = bar;
        const auto& t = model.tls[k];
        gamma_t[k] = t.gamma1() + 2.0 * cr.sigma_rates[k];
        drive[k + 1] = t.gamma_up + cr.sigma_rates[k];
        sigma_total += cr.sigma_rates[k];
    }
    drive[0] = model.gamma_q_up + sigma_total;
    const double gamma_q = model.qubit_gamma1() + 2.0 * sigma_total;
    return ArrowheadSystem::general(gamma_q, std::move(gamma_t), std::move(rates), std::move(drive));
}

BlochRedfield bloch_redfield_limit(const std::function<double(double)>& spectral_density,
                                   const std::function<double(double)>& tls_population,
                                   double omega_q) {
    const double gamma = spectral_density(omega_q);
    if (!(gamma >= 0.0)) throw DomainError("spectral density must be non-negative");
    BlochRedfield br;
    br.gamma1 = 2.0 * M_PI * gamma;
    br.gamma2 = 0.5 * br.gamma1;
    br.p_eq = tls_population(omega_q);
    return br;
}

double lamb_shift(const std::function<double(double)>& s, double omega_q, double quadrature_tol,
                  std::span<const double> breakpoints) {
    if (!(omega_q > 0.0)) throw DomainError("lamb_shift: omega_q must be positive");
    if (!(quadrature_tol > 0.0)) throw DomainError("lamb_shift: tolerance must be positive");
    using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double wq = omega_q;
    auto f = [&](double w) { return 2.0 * wq * s(w) / ((wq - w) * (wq + w)); };
    // f(ω_q + u) + f(ω_q − u) with the 1/u poles combined analytically.
    auto paired = [&](double u) {
        const double lo = s(wq - u), hi = s(wq + u);
        return 2.0 * wq * (2.0 * wq * (lo - hi) / u + (lo + hi)) / ((2.0 * wq - u) * (2.0 * wq + u));
    };

    double total = 0.0, error = 0.0, l1 = 0.0;
    auto integrate = [&](auto&& fn, double a, double b, unsigned depth = 15) {
        if (!(b > a)) return;
        double err = 0.0, piece_l1 = 0.0;
        const double v = gk::integrate(fn, a, b, depth, quadrature_tol, &err, &piece_l1);
        if (!std::isfinite(v)) throw QuadratureError("lamb_shift: integrand is not finite");
        total += v;
        error += err;
        l1 += piece_l1;
    };

    // Pieces in u for the paired region [0, ω_q], in ω beyond 2ω_q.
    std::vector<double> u_cuts{0.0, wq};
    std::vector<double> w_cuts{2.0 * wq};
    for (double b : breakpoints) {
        if (!(b > 0.0)) continue;
        const double u = std::abs(b - wq);
        if (u > 0.0 && u < wq) u_cuts.push_back(u);
        if (b > 2.0 * wq) w_cuts.push_back(b);
    }
    std::sort(u_cuts.begin(), u_cuts.end());
    std::sort(w_cuts.begin(), w_cuts.end());
    // The pairing cancels 1/u to rounding error only; refining towards u = 0
    // amplifies that noise, so the innermost piece gets a single rule.
    const double inner = std::min(1e-3 * wq, 0.5 * u_cuts[1]);
    integrate(paired, 0.0, inner, 0);
    u_cuts[0] = inner;
    for (std::size_t i = 0; i + 1 < u_cuts.size(); ++i) integrate(paired, u_cuts[i], u_cuts[i + 1]);
    for (std::size_t i = 0; i + 1 < w_cuts.size(); ++i) integrate(f, w_cuts[i], w_cuts[i + 1]);
    integrate(f, w_cuts.back(), std::numeric_limits<double>::infinity());

    if (error > 100.0 * quadrature_tol * std::max(l1, std::numeric_limits<double>::min())) {
        std::ostringstream msg;
        msg << "lamb_shift: quadrature did not converge (error estimate " << error << ")";
        throw QuadratureError(msg.str());
    }
    // The integrand is even in ω.
    return 2.0 * total;
}

} // namespace spinbath
