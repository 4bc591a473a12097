#include "spinbath/arrowhead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

void check_rate(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw DomainError(std::string("ArrowheadSystem: ") + name +
                          " must be finite and non-negative");
    }
}

} // namespace

ArrowheadSystem ArrowheadSystem::thermal(double gamma_q, double gamma_t,
                                         std::vector<double> rates, double p_th) {
    if (!(p_th >= 0.0 && p_th <= 1.0)) {
        throw DomainError("ArrowheadSystem: p_th must lie in [0, 1]");
    }
    check_rate(gamma_q, "gamma_q");
    check_rate(gamma_t, "gamma_t");
    const std::size_t n = rates.size();
    std::vector<double> drive(n + 1, gamma_t * p_th);
    drive[0] = gamma_q * p_th;
    ArrowheadSystem sys = general(gamma_q, std::vector<double>(n, gamma_t),
                                  std::move(rates), std::move(drive));
    sys.p_th_ = p_th;
    return sys;
}

ArrowheadSystem ArrowheadSystem::general(double gamma_q, std::vector<double> gamma_t,
                                         std::vector<double> rates,
                                         std::vector<double> drive) {
    check_rate(gamma_q, "gamma_q");
    if (gamma_t.size() != rates.size() || drive.size() != rates.size() + 1) {
        throw DomainError("ArrowheadSystem: inconsistent vector lengths");
    }
    for (double g : gamma_t) check_rate(g, "gamma_t");
    for (double r : rates) check_rate(r, "cross-relaxation rate");
    for (double d : drive) check_rate(d, "drive");
    if (drive[0] > gamma_q * (1.0 + 1e-12) + 1e-300) {
        throw DomainError("ArrowheadSystem: qubit drive exceeds its relaxation rate");
    }
    for (std::size_t k = 0; k < rates.size(); ++k) {
        if (drive[k + 1] > gamma_t[k] * (1.0 + 1e-12) + 1e-300) {
            throw DomainError("ArrowheadSystem: TLS drive exceeds its relaxation rate");
        }
    }

    // Drive proportional to the relaxation rates with one common factor is thermal.
    std::optional<double> common;
    bool thermal = true;
    auto probe = [&](double relax, double d) {
        if (relax == 0.0) {
            thermal = thermal && d == 0.0;
            return;
        }
        const double p = d / relax;
        if (!common) common = p;
        else if (std::abs(p - *common) > 1e-12 * std::max(1.0, std::abs(p))) thermal = false;
    };
    probe(gamma_q, drive[0]);
    for (std::size_t k = 0; k < rates.size(); ++k) probe(gamma_t[k], drive[k + 1]);

    ArrowheadSystem sys;
    if (thermal && common) sys.p_th_ = std::min(1.0, std::max(0.0, *common));
    sys.gamma_q_ = gamma_q;
    sys.gamma_t_ = std::move(gamma_t);
    sys.rates_ = std::move(rates);
    sys.drive_ = std::move(drive);
    return sys;
}

std::optional<double> ArrowheadSystem::uniform_gamma_t() const {
    if (gamma_t_.empty()) return 0.0;
    for (double g : gamma_t_) {
        if (g != gamma_t_.front()) return std::nullopt;
    }
    return gamma_t_.front();
}

double ArrowheadSystem::p_th() const {
    if (!p_th_) throw DomainError("ArrowheadSystem: system has no common thermal population");
    return *p_th_;
}

double ArrowheadSystem::gamma_tlss() const {
    return std::accumulate(rates_.begin(), rates_.end(), 0.0);
}

std::vector<double> ArrowheadSystem::steady_state() const {
    const std::size_t n = tls_count();
    if (p_th_) return std::vector<double>(n + 1, *p_th_);

    // Row k: -Γ_k p_0 + d_k p_k = b_k, eliminate into row 0.
    double schur = qubit_diagonal();
    double rhs = drive_[0];
    for (std::size_t k = 0; k < n; ++k) {
        const double d = tls_diagonal(k);
        if (d == 0.0) continue;
        schur -= rates_[k] * rates_[k] / d;
        rhs += rates_[k] * drive_[k + 1] / d;
    }
    std::vector<double> p(n + 1, 0.0);
    const double scale = qubit_diagonal();
    if (std::abs(schur) <= 1e-14 * scale || scale == 0.0) return p;
    p[0] = rhs / schur;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = tls_diagonal(k);
        p[k + 1] = d == 0.0 ? 0.0 : (drive_[k + 1] + rates_[k] * p[0]) / d;
    }
    return p;
}

Eigen::MatrixXd ArrowheadSystem::dense_generator() const {
    const std::size_t n = tls_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    a(0, 0) = qubit_diagonal();
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k + 1);
        a(0, i) = -rates_[k];
        a(i, 0) = -rates_[k];
        a(i, i) = tls_diagonal(k);
    }
    return a;
}

} // namespace spinbath
