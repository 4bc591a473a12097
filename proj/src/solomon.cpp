#include "spinbath/solomon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double pole_merge_tol = 1e-13;

void check_population(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(what) + " must lie in [0, 1]");
    }
}

void check_times(std::span<const double> times) {
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("times must be finite and >= 0");
    }
}

} // namespace

double pick_function(double lambda, const ArrowheadSystem& sys) {
    double f = sys.qubit_diagonal() - lambda;
    for (std::size_t k = 0; k < sys.tls_count(); ++k) {
        const double r = sys.rates()[k];
        if (r == 0.0) continue;
        const double gap = sys.tls_diagonal(k) - lambda;
        if (gap == 0.0) throw PoleError("pick_function evaluated at a pole", k);
        f -= r * r / gap;
    }
    return f;
}

std::vector<DecoupledMode> SpectralDecomposition::decoupled() const {
    std::vector<DecoupledMode> out;
    for (std::size_t g = 0; g < all_pole_.size(); ++g) {
        const std::size_t m = coupled_index_[g] >= 0 ? all_size_[g] - 1 : all_size_[g];
        if (m > 0) out.push_back({all_pole_[g], m});
    }
    return out;
}

std::vector<double> SpectralDecomposition::all_eigenvalues() const {
    std::vector<double> out(lambda_.begin(), lambda_.end());
    for (const auto& d : decoupled()) out.insert(out.end(), d.multiplicity, d.rate);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

double SpectralDecomposition::pole_gap(std::size_t group, std::size_t m) const {
    return (pole_[group] - pole_[origin_[m]]) - tau_[m];
}

std::vector<double> SpectralDecomposition::eigenvector(std::size_t m) const {
    std::vector<double> v(tls_count() + 1, 0.0);
    v[0] = 1.0;
    for (std::size_t k = 0; k < tls_count(); ++k) {
        const auto c = coupled_index_[group_of_[k]];
        if (c >= 0 && rate_[k] != 0.0) v[k + 1] = rate_[k] / pole_gap(c, m);
    }
    return v;
}

ModalState SpectralDecomposition::decompose(std::span<const double> p_star) const {
    if (p_star.size() != tls_count() + 1) throw DomainError("population vector has wrong length");
    const std::size_t groups = all_pole_.size();
    std::vector<double> x(groups, 0.0), s(groups, 0.0);
    for (std::size_t k = 0; k < tls_count(); ++k) {
        x[group_of_[k]] += rate_[k] * p_star[k + 1];
        s[group_of_[k]] += p_star[k + 1];
    }

    ModalState out;
    out.decoupled.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const auto c = coupled_index_[g];
        out.decoupled[g] = c >= 0 ? s[g] - csum_[c] * x[g] / weight_[c] : s[g];
    }
    out.coupled.resize(lambda_.size());
    for (std::size_t m = 0; m < lambda_.size(); ++m) {
        double dot = p_star[0];
        for (std::size_t g = 0; g < groups; ++g) {
            const auto c = coupled_index_[g];
            if (c >= 0) dot += x[g] / pole_gap(c, m);
        }
        out.coupled[m] = dot / norm_sq_[m];
    }
    return out;
}

ModalState SpectralDecomposition::advance(const ModalState& s, double dt) const {
    ModalState out = s;
    for (std::size_t m = 0; m < lambda_.size(); ++m) out.coupled[m] *= std::exp(-lambda_[m] * dt);
    for (std::size_t g = 0; g < all_pole_.size(); ++g) out.decoupled[g] *= std::exp(-all_pole_[g] * dt);
    return out;
}

ModalState SpectralDecomposition::step_factors(double dt) const {
    ModalState f;
    f.coupled.resize(lambda_.size());
    f.decoupled.resize(all_pole_.size());
    for (std::size_t m = 0; m < lambda_.size(); ++m) f.coupled[m] = std::exp(-lambda_[m] * dt);
    for (std::size_t g = 0; g < all_pole_.size(); ++g) f.decoupled[g] = std::exp(-all_pole_[g] * dt);
    return f;
}

void SpectralDecomposition::apply(ModalState& s, const ModalState& factors) const {
    for (std::size_t m = 0; m < s.coupled.size(); ++m) s.coupled[m] *= factors.coupled[m];
    for (std::size_t g = 0; g < s.decoupled.size(); ++g) s.decoupled[g] *= factors.decoupled[g];
}

void SpectralDecomposition::kick_qubit(ModalState& s, double delta) const {
    for (std::size_t m = 0; m < lambda_.size(); ++m) s.coupled[m] += delta / norm_sq_[m];
}

double SpectralDecomposition::qubit(const ModalState& s) const {
    return std::accumulate(s.coupled.begin(), s.coupled.end(), 0.0);
}

double SpectralDecomposition::tls_excess(const ModalState& s) const {
    double e = std::accumulate(s.decoupled.begin(), s.decoupled.end(), 0.0);
    for (std::size_t m = 0; m < lambda_.size(); ++m) e += s.coupled[m] * tls_sum_[m];
    return e;
}

std::vector<double> SpectralDecomposition::expand(std::span<const double> p_star0, double t) const {
    const ModalState s0 = decompose(p_star0);
    const std::size_t groups = all_pole_.size();
    std::vector<double> x(groups, 0.0);
    for (std::size_t k = 0; k < tls_count(); ++k) x[group_of_[k]] += rate_[k] * p_star0[k + 1];

    std::vector<double> b(lambda_.size());
    for (std::size_t m = 0; m < lambda_.size(); ++m) b[m] = s0.coupled[m] * std::exp(-lambda_[m] * t);

    std::vector<double> per_group(pole_.size(), 0.0);
    for (std::size_t c = 0; c < pole_.size(); ++c) {
        for (std::size_t m = 0; m < lambda_.size(); ++m) per_group[c] += b[m] / pole_gap(c, m);
    }

    std::vector<double> p(tls_count() + 1);
    p[0] = std::accumulate(b.begin(), b.end(), 0.0);
    for (std::size_t k = 0; k < tls_count(); ++k) {
        const std::size_t g = group_of_[k];
        const auto c = coupled_index_[g];
        const double decay = std::exp(-all_pole_[g] * t);
        if (c >= 0) {
            p[k + 1] = rate_[k] * per_group[c] +
                       (p_star0[k + 1] - rate_[k] * x[g] / weight_[c]) * decay;
        } else {
            p[k + 1] = p_star0[k + 1] * decay;
        }
    }
    return p;
}

SpectralDecomposition eigen_decompose(const ArrowheadSystem& sys) {
    SpectralDecomposition s;
    const std::size_t n = sys.tls_count();
    s.rate_.assign(sys.rates().begin(), sys.rates().end());
    s.group_of_.resize(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return sys.tls_diagonal(l) > sys.tls_diagonal(r);
    });

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = order[i];
        const double d = sys.tls_diagonal(k);
        const bool fresh = s.all_pole_.empty() ||
                           std::abs(s.all_pole_.back() - d) >
                               pole_merge_tol * std::max(std::abs(d), std::abs(s.all_pole_.back()));
        if (fresh) {
            s.all_pole_.push_back(d);
            s.all_size_.push_back(0);
            s.coupled_index_.push_back(-1);
        }
        const std::size_t g = s.all_pole_.size() - 1;
        s.group_of_[k] = g;
        ++s.all_size_[g];
        const double r = s.rate_[k];
        if (r > 0.0) {
            if (s.coupled_index_[g] < 0) {
                s.coupled_index_[g] = static_cast<std::ptrdiff_t>(s.pole_.size());
                s.pole_.push_back(s.all_pole_[g]);
                s.weight_.push_back(0.0);
                s.csum_.push_back(0.0);
            }
            s.weight_.back() += r * r;
            s.csum_.back() += r;
        }
    }

    const double d0 = sys.qubit_diagonal();
    const std::size_t groups = s.pole_.size();
    // Without intrinsic loss the total excess is conserved, so the bottom root
    // is exactly zero; rounding in f(0) must not move it.
    const bool lossless = sys.gamma_q() == 0.0 &&
                          std::all_of(sys.gamma_t().begin(), sys.gamma_t().end(), [](double x) { return x == 0.0; });

    if (groups == 0) {
        s.lambda_ = {d0};
        s.norm_sq_ = {1.0};
        s.origin_ = {0};
        s.tau_ = {0.0};
        s.tls_sum_ = {0.0};
        return s;
    }

    // f relative to origin pole o: f = (d0 − p_o) − τ − Σ w_g / ((p_g − p_o) − τ).
    // h = τ f removes the origin pole; Newton runs on h, bisection on sign(f).
    auto eval = [&](std::size_t o, double tau, double& f, double& h, double& dh) {
        double rest = (d0 - s.pole_[o]) - tau;
        double drest = -1.0;
        for (std::size_t g = 0; g < groups; ++g) {
            if (g == o) continue;
            const double gap = (s.pole_[g] - s.pole_[o]) - tau;
            const double q = s.weight_[g] / gap;
            rest -= q;
            drest -= q / gap;
        }
        f = rest + s.weight_[o] / tau;
        h = tau * rest + s.weight_[o];
        dh = rest + tau * drest;
    };

    double wsum = std::accumulate(s.weight_.begin(), s.weight_.end(), 0.0);
    const double upper = std::max(d0, s.pole_[0]) + std::sqrt(wsum);

    s.lambda_.resize(groups + 1);
    s.norm_sq_.resize(groups + 1);
    s.origin_.resize(groups + 1);
    s.tau_.resize(groups + 1);
    s.tls_sum_.resize(groups + 1);

    for (std::size_t m = 0; m <= groups; ++m) {
        std::size_t o;
        double lo, hi;   // τ bracket: f(lo) > 0 > f(hi)
        if (m == 0) {
            o = 0;
            lo = 0.0;
            hi = (upper - s.pole_[0]) * (1.0 + 4 * eps) + std::numeric_limits<double>::min();
            double f, h, dh;
            eval(o, hi, f, h, dh);
            if (f > 0.0) throw BracketError("largest root above Gershgorin bound", s.pole_[0], upper);
        } else if (m < groups) {
            const double width = s.pole_[m - 1] - s.pole_[m];
            double f, h, dh;
            eval(m, 0.5 * width, f, h, dh);
            if (f > 0.0) {
                o = m - 1;
                lo = -0.5 * width;
                hi = 0.0;
            } else {
                o = m;
                lo = 0.0;
                hi = 0.5 * width;
            }
        } else {
            o = groups - 1;
            lo = -s.pole_[o];
            hi = 0.0;
        }

        double tau;
        double f_lo = std::numeric_limits<double>::infinity();
        if (m == groups) {
            double h, dh;
            eval(o, lo, f_lo, h, dh);
        }
        if (m == groups && (lossless || f_lo <= 0.0)) {
            tau = lo;   // generator is singular: λ = 0
        } else {
            tau = 0.5 * (lo + hi);
            for (int it = 0; it < 300; ++it) {
                double f, h, dh;
                eval(o, tau, f, h, dh);
                if (f == 0.0) break;
                if (f > 0.0) lo = tau; else hi = tau;
                double next = dh != 0.0 ? tau - h / dh : 0.5 * (lo + hi);
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                const double step = std::abs(next - tau);
                tau = next;
                if (step <= 2 * eps * std::abs(tau) || hi - lo <= 2 * eps * std::abs(tau)) break;
                if (it == 299) {
                    throw BracketError("root refinement did not converge", s.pole_[o] + lo,
                                       s.pole_[o] + hi);
                }
            }
        }

        s.origin_[m] = o;
        s.tau_[m] = tau;
        s.lambda_[m] = s.pole_[o] + tau;
        double norm = 1.0, tsum = 0.0;
        for (std::size_t g = 0; g < groups; ++g) {
            const double gap = (s.pole_[g] - s.pole_[o]) - tau;
            norm += s.weight_[g] / (gap * gap);
            tsum += s.csum_[g] / gap;
        }
        s.norm_sq_[m] = norm;
        s.tls_sum_[m] = tsum;
    }
    return s;
}

Trajectory solve(const ArrowheadSystem& sys, std::span<const double> p0,
                 std::span<const double> times, SolveOutput output) {
    return solve(sys, eigen_decompose(sys), p0, times, output);
}

Trajectory solve(const ArrowheadSystem& sys, const SpectralDecomposition& spec,
                 std::span<const double> p0, std::span<const double> times,
                 SolveOutput output) {
    const std::size_t n = sys.tls_count();
    if (p0.size() != n + 1) throw DomainError("solve: p0 must have n+1 entries");
    for (double p : p0) check_population(p, "solve: initial populations");
    check_times(times);

    const std::vector<double> p_ss = sys.steady_state();
    std::vector<double> x(n + 1);
    for (std::size_t i = 0; i <= n; ++i) x[i] = p0[i] - p_ss[i];

    Trajectory tr;
    tr.times.assign(times.begin(), times.end());
    tr.p_q.resize(times.size());
    tr.tls_excess.resize(times.size());
    const bool full = output == SolveOutput::full;
    if (full) tr.p_t.assign(n, std::vector<double>(times.size()));

    const ModalState s0 = spec.decompose(x);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const ModalState s = spec.advance(s0, times[i]);
        tr.p_q[i] = p_ss[0] + spec.qubit(s);
        tr.tls_excess[i] = spec.tls_excess(s);
        if (full) {
            const auto p = spec.expand(x, times[i]);
            for (std::size_t k = 0; k < n; ++k) tr.p_t[k][i] = p_ss[k + 1] + p[k + 1];
        }
    }
    return tr;
}

std::vector<double> qubit_relaxation(const ArrowheadSystem& sys, double p_q0,
                                     std::span<const double> times) {
    check_population(p_q0, "qubit_relaxation: p_q0");
    std::vector<double> p0 = sys.steady_state();
    p0[0] = p_q0;
    return solve(sys, p0, times, SolveOutput::qubit_only).p_q;
}

TransitionRates transition_rates(const ArrowheadSystem& sys, std::span<const double> p_t) {
    if (p_t.size() != sys.tls_count()) throw DomainError("transition_rates: wrong TLS count");
    TransitionRates r;
    r.up = sys.drive()[0];
    r.down = sys.gamma_q() - sys.drive()[0];
    for (std::size_t k = 0; k < p_t.size(); ++k) {
        check_population(p_t[k], "transition_rates: TLS populations");
        r.up += sys.rates()[k] * p_t[k];
        r.down += sys.rates()[k] * (1.0 - p_t[k]);
    }
    r.gamma1 = sys.gamma1();
    r.p_eq = r.gamma1 > 0.0 ? r.up / r.gamma1 : 0.0;
    return r;
}

IdenticalRatesResult identical_rates_solution(std::size_t n, double gamma_qt, double gamma_q,
                                              double gamma_t, double p_th, double p_q0,
                                              double p_t0, std::span<const double> times) {
    if (n == 0) throw DomainError("identical_rates_solution: n must be at least 1");
    if (!(gamma_qt >= 0.0) || !(gamma_q >= 0.0) || !(gamma_t >= 0.0)) {
        throw DomainError("identical_rates_solution: rates must be non-negative");
    }
    check_population(p_th, "identical_rates_solution: p_th");
    check_times(times);

    const double nd = static_cast<double>(n);
    const double pq = p_q0 - p_th;
    const double pt = p_t0 - p_th;
    IdenticalRatesResult out;
    out.p_q.resize(times.size());
    out.p_t.resize(times.size());

    if (gamma_qt == 0.0) {
        out.lambda0 = std::max(gamma_q, gamma_t);
        out.lambda2 = std::min(gamma_q, gamma_t);
        for (std::size_t i = 0; i < times.size(); ++i) {
            out.p_q[i] = pq * std::exp(-gamma_q * times[i]) + p_th;
            out.p_t[i] = pt * std::exp(-gamma_t * times[i]) + p_th;
        }
        return out;
    }

    const double g = gamma_qt;
    const double b = gamma_q + (nd - 1.0) * g - gamma_t;
    const double root = std::sqrt(b * b + 4.0 * nd * g * g);
    // x0 x2 = −n; take the cancellation-free one first.
    double x0, x2;
    if (b >= 0.0) {
        x0 = -(b + root) / (2.0 * g);
        x2 = -nd / x0;
    } else {
        x2 = (root - b) / (2.0 * g);
        x0 = -nd / x2;
    }
    out.lambda0 = -g * x0 + gamma_t + g;
    out.lambda2 = -g * x2 + gamma_t + g;
    const double q = (2.0 * g * pq + b * pt) / root;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double e0 = 0.5 * (pt - q) * std::exp(-out.lambda0 * times[i]);
        const double e2 = 0.5 * (pt + q) * std::exp(-out.lambda2 * times[i]);
        out.p_q[i] = x0 * e0 + x2 * e2 + p_th;
        out.p_t[i] = e0 + e2 + p_th;
    }
    return out;
}

double gamma_tlss_lorentzian(double a, double b, double c) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("gamma_tlss_lorentzian: a, b must be positive");
    if (!std::isfinite(c)) throw DomainError("gamma_tlss_lorentzian: c must be finite");
    // sinh x / (cosh x − cos θ) = sinh(x/2)cosh(x/2) / (sinh²(x/2) + sin²(θ/2))
    const double half = M_PI * b;
    const double pi_ab = M_PI * a * b;
    if (half > 300.0) return pi_ab;
    const double sh = std::sinh(half);
    const double ch = std::cosh(half);
    const double sn = std::sin(M_PI * b * c);
    return pi_ab * sh * ch / (sh * sh + sn * sn);
}

} // namespace spinbath
