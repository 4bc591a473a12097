#include "spinbath/liouvillian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

constexpr cplx I{0.0, 1.0};

struct Unit {
    double omega, up, down, phi;
};

struct Sites {
    std::size_t n = 0;   // TLS count
    std::size_t dim = 0; // Hilbert dimension
    std::vector<Unit> unit;   // 0 = qubit
    std::vector<double> g;    // g[k] for TLS k, g[0] unused
    std::vector<double> energy;
};

Sites make_sites(const SpinBathModel& model, std::size_t cap) {
    model.validate();
    const std::size_t n = model.tls_count();
    if (n > cap) {
        throw SizeError("exact Lindblad path supports at most " + std::to_string(cap) +
                        " TLSs, got " + std::to_string(n));
    }
    Sites s;
    s.n = n;
    s.dim = std::size_t{1} << (n + 1);
    s.unit.push_back({model.omega_q, model.gamma_q_up, model.gamma_q_down, model.gamma_q_phi});
    s.g.push_back(0.0);
    for (const auto& t : model.tls) {
        s.unit.push_back({t.omega, t.gamma_up, t.gamma_down, t.gamma_phi});
        s.g.push_back(t.g);
    }
    s.energy.resize(s.dim);
    for (std::size_t m = 0; m < s.dim; ++m) {
        double e = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            e += 0.5 * s.unit[j].omega * (((m >> j) & 1u) ? -1.0 : 1.0);
        }
        s.energy[m] = e;
    }
    return s;
}

// Decay of the element |m><n| under the anticommutator and dephasing terms.
double kappa(const Sites& s, std::size_t m, std::size_t n) {
    double k = 0.0;
    for (std::size_t j = 0; j <= s.n; ++j) {
        const bool gm = (m >> j) & 1u;
        const bool gn = (n >> j) & 1u;
        const auto& u = s.unit[j];
        k += 0.5 * u.down * ((gm ? 0 : 1) + (gn ? 0 : 1));
        k += 0.5 * u.up * ((gm ? 1 : 0) + (gn ? 1 : 0));
        if (gm != gn) k += u.phi;
    }
    return k;
}

// Visits every nonzero entry of column (m, n): visit(row_m, row_n, coefficient).
template <class Visit>
void for_column(const Sites& s, std::size_t m, std::size_t n, Visit&& visit) {
    visit(m, n, -I * (s.energy[m] - s.energy[n]) - kappa(s, m, n));
    for (std::size_t k = 1; k <= s.n; ++k) {
        if (s.g[k] == 0.0) continue;
        const std::size_t f = 1u | (std::size_t{1} << k);
        visit(m ^ f, n, -I * s.g[k]);
        visit(m, n ^ f, I * s.g[k]);
    }
    for (std::size_t j = 0; j <= s.n; ++j) {
        const std::size_t b = std::size_t{1} << j;
        const bool gm = m & b, gn = n & b;
        if (!gm && !gn && s.unit[j].down != 0.0) visit(m | b, n | b, cplx{s.unit[j].down});
        if (gm && gn && s.unit[j].up != 0.0) visit(m & ~b, n & ~b, cplx{s.unit[j].up});
    }
}

void apply_vec(const Sites& s, const cplx* in, cplx* out) {
    const std::size_t d = s.dim;
    std::fill(out, out + d * d, cplx{});
    for (std::size_t m = 0; m < d; ++m) {
        for (std::size_t n = 0; n < d; ++n) {
            const cplx x = in[m * d + n];
            if (x == cplx{}) continue;
            for_column(s, m, n, [&](std::size_t rm, std::size_t rn, cplx c) {
                out[rm * d + rn] += c * x;
            });
        }
    }
}

double norm_bound(const Sites& s) {
    double b = 0.0;
    for (std::size_t j = 0; j <= s.n; ++j) {
        b += std::abs(s.unit[j].omega) + 2.0 * (s.unit[j].up + s.unit[j].down + s.unit[j].phi);
        b += 2.0 * s.g[j];
    }
    return std::max(b, std::numeric_limits<double>::min());
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& rho) {
    const auto d = rho.rows();
    Eigen::VectorXcd v(d * d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) v[m * d + n] = rho(m, n);
    }
    return v;
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index d) {
    Eigen::MatrixXcd rho(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) rho(m, n) = v[m * d + n];
    }
    return rho;
}

using Operator = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

double round_step(double t) {
    const double s = std::pow(10.0, std::floor(std::log10(t)) - 1.0);
    return std::ceil(t / s) * s;
}

// exp(tA)v by restarted Arnoldi with local error control.
Eigen::VectorXcd expv(double t, const Operator& op, const Eigen::VectorXcd& v, double anorm,
                      double tol) {
    const int m_max = std::min<int>(30, static_cast<int>(v.size()));
    const double btol = 1e-12 * anorm;
    const double gamma = 0.9, delta = 1.2;
    const int max_reject = 20;

    Eigen::VectorXcd w = v;
    double beta = w.norm();
    if (beta == 0.0 || t == 0.0) return w;

    const double fact = std::pow((m_max + 1) / std::exp(1.0), m_max + 1) *
                        std::sqrt(2.0 * M_PI * (m_max + 1));
    double xm = 1.0 / m_max;
    double t_new = (1.0 / anorm) * std::pow((fact * tol) / (4.0 * beta * anorm), xm);
    t_new = round_step(t_new);
    double t_now = 0.0;

    Eigen::MatrixXcd V(v.size(), m_max + 1);
    Eigen::VectorXcd p(v.size());
    for (int guard = 0; t_now < t; ++guard) {
        if (guard > 10000000) throw Error("Krylov propagation did not finish");
        double t_step = std::min(t - t_now, t_new);
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m_max + 2, m_max + 2);
        V.col(0) = w / beta;
        int mb = m_max;
        int k1 = 2;
        for (int j = 0; j < m_max; ++j) {
            op(V.col(j), p);
            for (int i = 0; i <= j; ++i) {
                H(i, j) = V.col(i).dot(p);
                p -= H(i, j) * V.col(i);
            }
            const double s = p.norm();
            if (s < btol) {
                k1 = 0;
                mb = j + 1;
                t_step = t - t_now;
                break;
            }
            H(j + 1, j) = s;
            V.col(j + 1) = p / s;
        }
        double avnorm = 0.0;
        if (k1 != 0) {
            H(m_max + 1, m_max) = 1.0;
            op(V.col(m_max), p);
            avnorm = p.norm();
        }

        Eigen::MatrixXcd F;
        double err_loc = 0.0;
        for (int reject = 0;; ++reject) {
            const int mx = mb + k1;
            F = (t_step * H.topLeftCorner(mx, mx)).exp();
            if (k1 == 0) {
                err_loc = btol;
                break;
            }
            const double phi1 = std::abs(beta * F(m_max, 0));
            const double phi2 = std::abs(beta * F(m_max + 1, 0) * avnorm);
            if (phi1 > 10.0 * phi2) {
                err_loc = phi2;
                xm = 1.0 / m_max;
            } else if (phi1 > phi2) {
                err_loc = phi1 * phi2 / (phi1 - phi2);
                xm = 1.0 / m_max;
            } else {
                err_loc = phi1;
                xm = 1.0 / (m_max - 1);
            }
            if (err_loc <= delta * t_step * tol) break;
            if (reject == max_reject) throw Error("Krylov propagation: tolerance unreachable");
            t_step = round_step(gamma * t_step * std::pow(t_step * tol / err_loc, xm));
        }
        const int mx = mb + std::max(0, k1 - 1);
        w = V.leftCols(mx) * (beta * F.col(0).head(mx));
        beta = w.norm();
        t_now += t_step;
        if (err_loc > 0.0) {
            t_new = round_step(gamma * t_step * std::pow(t_step * tol / err_loc, xm));
        } else {
            t_new = t - t_now;
        }
        if (t_new <= 0.0) t_new = t - t_now;
    }
    return w;
}

// Steps through sorted times; propagate(dt, v) advances v by dt.
template <class Propagate>
std::vector<Eigen::MatrixXcd> march(const Eigen::MatrixXcd& rho0, std::span<const double> times,
                                    Propagate&& propagate) {
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("evolve_exact: times must be >= 0");
    }
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    std::vector<Eigen::MatrixXcd> out(times.size());
    Eigen::VectorXcd v = vec(rho0);
    double t_prev = 0.0;
    for (std::size_t idx : order) {
        const double dt = times[idx] - t_prev;
        if (dt > 0.0) v = propagate(dt, v);
        t_prev = times[idx];
        out[idx] = unvec(v, rho0.rows());
    }
    return out;
}

} // namespace

Eigen::MatrixXcd build_hamiltonian(const SpinBathModel& model, std::size_t cap) {
    const Sites s = make_sites(model, cap);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(s.dim, s.dim);
    for (std::size_t m = 0; m < s.dim; ++m) {
        h(m, m) = s.energy[m];
        for (std::size_t k = 1; k <= s.n; ++k) {
            const std::size_t f = 1u | (std::size_t{1} << k);
            h(m ^ f, m) += s.g[k];
        }
    }
    return h;
}

DenseSuperoperator build_superoperator(const SpinBathModel& model, std::size_t cap) {
    const Sites s = make_sites(model, std::min(cap, max_exact_tls));
    DenseSuperoperator sup;
    sup.tls_count = s.n;
    sup.hilbert_dim = s.dim;
    sup.dim = s.dim * s.dim;
    sup.matrix = Eigen::MatrixXcd::Zero(sup.dim, sup.dim);
    const std::size_t d = s.dim;
    for (std::size_t m = 0; m < d; ++m) {
        for (std::size_t n = 0; n < d; ++n) {
            const auto col = static_cast<Eigen::Index>(m * d + n);
            for_column(s, m, n, [&](std::size_t rm, std::size_t rn, cplx c) {
                sup.matrix(static_cast<Eigen::Index>(rm * d + rn), col) += c;
            });
        }
    }
    return sup;
}

Eigen::MatrixXcd apply_liouvillian(const SpinBathModel& model, const Eigen::MatrixXcd& rho) {
    const Sites s = make_sites(model, max_exact_tls);
    if (rho.rows() != static_cast<Eigen::Index>(s.dim) || rho.cols() != rho.rows()) {
        throw DomainError("apply_liouvillian: density matrix has wrong dimension");
    }
    const Eigen::VectorXcd in = vec(rho);
    Eigen::VectorXcd out(in.size());
    apply_vec(s, in.data(), out.data());
    return unvec(out, rho.rows());
}

CoherenceClass classify(std::size_t m, std::size_t n) {
    const std::size_t x = m ^ n;
    if (x == 0) return CoherenceClass::population;
    if ((x & 1u) && std::popcount(x) == 2) {
        const std::size_t tls_bit = x & ~std::size_t{1};
        const bool q_ground = m & 1u;
        const bool t_ground = m & tls_bit;
        // One unit excited in m and the other in n keeps the excitation number.
        return q_ground != t_ground ? CoherenceClass::one_photon : CoherenceClass::two_photon;
    }
    return CoherenceClass::rest;
}

BlockLiouvillian sort_blocks(const DenseSuperoperator& sup) {
    const std::size_t d = sup.hilbert_dim;
    std::vector<std::size_t> cls[4];
    for (std::size_t m = 0; m < d; ++m) {
        for (std::size_t n = 0; n < d; ++n) {
            cls[static_cast<int>(classify(m, n))].push_back(m * d + n);
        }
    }
    BlockLiouvillian b;
    b.tls_ = sup.tls_count;
    b.hilbert_ = d;
    b.nd_ = cls[0].size();
    b.n1_ = cls[1].size();
    b.n2_ = cls[2].size();
    b.nr_ = cls[3].size();
    for (auto& c : cls) b.perm_.insert(b.perm_.end(), c.begin(), c.end());

    const auto dim = static_cast<Eigen::Index>(sup.dim);
    b.sorted_.resize(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            b.sorted_(i, j) = sup.matrix(b.perm_[i], b.perm_[j]);
        }
    }
    return b;
}

Eigen::MatrixXcd BlockLiouvillian::gamma_block() const { return sorted_.block(0, 0, nd_, nd_); }
Eigen::MatrixXcd BlockLiouvillian::r1() const { return sorted_.block(nd_, 0, n1_, nd_); }
Eigen::MatrixXcd BlockLiouvillian::r2() const { return sorted_.block(nd_ + n1_, 0, n2_, nd_); }
Eigen::MatrixXcd BlockLiouvillian::r1_back() const { return sorted_.block(0, nd_, nd_, n1_); }
Eigen::MatrixXcd BlockLiouvillian::r2_back() const { return sorted_.block(0, nd_ + n1_, nd_, n2_); }
Eigen::MatrixXcd BlockLiouvillian::c1() const { return sorted_.block(nd_, nd_, n1_, n1_); }
Eigen::MatrixXcd BlockLiouvillian::c2() const {
    return sorted_.block(nd_ + n1_, nd_ + n1_, n2_, n2_);
}
Eigen::MatrixXcd BlockLiouvillian::cr() const {
    const std::size_t o = nd_ + n1_ + n2_;
    return sorted_.block(o, o, nr_, nr_);
}
Eigen::MatrixXcd BlockLiouvillian::cr1() const {
    return sorted_.block(nd_, nd_ + n1_ + n2_, n1_, nr_);
}
Eigen::MatrixXcd BlockLiouvillian::cr2() const {
    return sorted_.block(nd_ + n1_, nd_ + n1_ + n2_, n2_, nr_);
}
Eigen::MatrixXcd BlockLiouvillian::coherence_to_population() const {
    return sorted_.block(0, nd_, nd_, n1_ + n2_ + nr_);
}
Eigen::MatrixXcd BlockLiouvillian::population_to_coherence() const {
    return sorted_.block(nd_, 0, n1_ + n2_ + nr_, nd_);
}
Eigen::MatrixXcd BlockLiouvillian::coherence_block() const {
    const std::size_t nc = n1_ + n2_ + nr_;
    return sorted_.block(nd_, nd_, nc, nc);
}

std::pair<std::size_t, std::size_t> BlockLiouvillian::element(std::size_t slot) const {
    return {perm_[slot] / hilbert_, perm_[slot] % hilbert_};
}

Eigen::MatrixXcd BlockLiouvillian::unsort() const {
    const auto dim = sorted_.rows();
    Eigen::MatrixXcd out(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index i = 0; i < dim; ++i) out(perm_[i], perm_[j]) = sorted_(i, j);
    }
    return out;
}

void validate_density_matrix(const Eigen::MatrixXcd& rho) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) throw StateError("density matrix must be square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw StateError("density matrix is not Hermitian");
    }
    const cplx tr = rho.trace();
    if (std::abs(tr - cplx{1.0}) > 1e-10) throw StateError("density matrix trace is not 1");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw StateError("density matrix is not positive");
}

Eigen::MatrixXcd product_state(std::span<const double> excited) {
    const std::size_t units = excited.size();
    const std::size_t d = std::size_t{1} << units;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t m = 0; m < d; ++m) {
        double p = 1.0;
        for (std::size_t j = 0; j < units; ++j) {
            p *= ((m >> j) & 1u) ? 1.0 - excited[j] : excited[j];
        }
        rho(m, m) = p;
    }
    return rho;
}

std::vector<Eigen::MatrixXcd> evolve_exact(const DenseSuperoperator& sup,
                                           const Eigen::MatrixXcd& rho0,
                                           std::span<const double> times) {
    validate_density_matrix(rho0);
    if (rho0.rows() != static_cast<Eigen::Index>(sup.hilbert_dim)) {
        throw StateError("density matrix dimension does not match the superoperator");
    }
    if (sup.dim <= 256) {
        std::map<double, Eigen::MatrixXcd> cache;
        return march(rho0, times, [&](double dt, const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
            auto it = cache.find(dt);
            if (it == cache.end()) {
                if (cache.size() > 32) cache.clear();
                it = cache.emplace(dt, (sup.matrix * dt).exp()).first;
            }
            return it->second * v;
        });
    }
    const double anorm = sup.matrix.cwiseAbs().rowwise().sum().maxCoeff();
    const Operator op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y.noalias() = sup.matrix * x; };
    return march(rho0, times, [&](double dt, const Eigen::VectorXcd& v) {
        return expv(dt, op, v, std::max(anorm, 1e-300), 1e-13);
    });
}

std::vector<Eigen::MatrixXcd> evolve_exact(const SpinBathModel& model,
                                           const Eigen::MatrixXcd& rho0,
                                           std::span<const double> times) {
    const Sites s = make_sites(model, max_exact_tls);
    if (s.n <= 3) return evolve_exact(build_superoperator(model), rho0, times);

    validate_density_matrix(rho0);
    if (rho0.rows() != static_cast<Eigen::Index>(s.dim)) {
        throw StateError("density matrix dimension does not match the model");
    }
    const Operator op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
        y.resize(x.size());
        apply_vec(s, x.data(), y.data());
    };
    const double anorm = norm_bound(s);
    return march(rho0, times, [&](double dt, const Eigen::VectorXcd& v) {
        return expv(dt, op, v, anorm, 1e-13);
    });
}

std::vector<double> populations(const Eigen::MatrixXcd& rho) {
    const auto d = static_cast<std::size_t>(rho.rows());
    if (d < 2 || !std::has_single_bit(d)) throw StateError("populations: dimension must be 2^(n+1)");
    const std::size_t units = static_cast<std::size_t>(std::countr_zero(d));
    std::vector<double> p(units, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const double r = rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
        for (std::size_t j = 0; j < units; ++j) {
            if (!((i >> j) & 1u)) p[j] += r;
        }
    }
    return p;
}

} // namespace spinbath
