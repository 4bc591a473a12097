#include "spinbath/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/zeta.hpp>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

} // namespace

void SpinBathModel::validate() const {
    if (!std::isfinite(omega_q)) throw DomainError("model: omega_q must be finite");
    if (!non_negative(gamma_q_up) || !non_negative(gamma_q_down) || !non_negative(gamma_q_phi)) {
        throw DomainError("model: qubit rates must be non-negative");
    }
    if (!(p_th >= 0.0 && p_th <= 1.0)) throw DomainError("model: p_th must lie in [0, 1]");
    for (std::size_t k = 0; k < tls.size(); ++k) {
        const auto& t = tls[k];
        if (!std::isfinite(t.omega) || !non_negative(t.g) || !non_negative(t.gamma_up) ||
            !non_negative(t.gamma_down) || !non_negative(t.gamma_phi)) {
            throw DomainError("model: TLS " + std::to_string(k + 1) +
                              " has a negative or non-finite parameter");
        }
    }
}

PowerLawRates build_power_law_rates(double a, double d, std::size_t n) {
    if (!(d > 1.0)) throw DomainError("power law: d <= 1 makes Σ a/k^d divergent");
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("power law: a must be positive");
    if (n == 0) throw DomainError("power law: n must be at least 1");

    PowerLawRates out;
    out.rates.resize(n);
    for (std::size_t k = 1; k <= n; ++k) {
        out.rates[k - 1] = a / std::pow(static_cast<double>(k), d);
    }
    // Σ_{k>n} k^{-d} < ∫_n^∞ x^{-d} dx
    out.tail_bound = a / ((d - 1.0) * std::pow(static_cast<double>(n), d - 1.0));
    return out;
}

double power_law_total(double a, double d) {
    if (!(d > 1.0)) throw DomainError("power law: d <= 1 makes Σ a/k^d divergent");
    return a * boost::math::zeta(d);
}

std::vector<LadderRate> build_lorentzian_ladder(double a, double b, double c, std::size_t n) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("lorentzian ladder: a and b must be positive");
    if (!std::isfinite(c)) throw DomainError("lorentzian ladder: c must be finite");

    const double shift = b * c;
    const long span = static_cast<long>(n);
    std::vector<LadderRate> out;
    out.reserve(2 * n + 1);
    for (long h = -span; h <= span; ++h) {
        const double x = static_cast<double>(h) - shift;
        out.push_back({a * b * b / (b * b + x * x), h});
    }
    std::stable_sort(out.begin(), out.end(), [](const LadderRate& l, const LadderRate& r) {
        if (l.rate != r.rate) return l.rate > r.rate;
        return std::abs(l.index) < std::abs(r.index);
    });
    return out;
}

std::vector<RateGroup> aggregate_rates(std::span<const double> rates) {
    std::vector<double> sorted(rates.begin(), rates.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::vector<RateGroup> groups;
    for (double r : sorted) {
        if (!groups.empty() && groups.back().rate == r) {
            ++groups.back().multiplicity;
        } else {
            groups.push_back({r, 1});
        }
    }
    return groups;
}

std::vector<double> RateDistribution::rates() const {
    return std::visit(
        [](const auto& k) -> std::vector<double> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ExplicitRates>) {
                for (double r : k.rates) {
                    if (!(r > 0.0) || !std::isfinite(r)) {
                        throw DomainError("explicit rates must be strictly positive");
                    }
                }
                std::vector<double> out = k.rates;
                std::sort(out.begin(), out.end(), std::greater<>());
                return out;
            } else if constexpr (std::is_same_v<T, PowerLawDistribution>) {
                return build_power_law_rates(k.a, k.d, k.n).rates;
            } else {
                std::vector<double> out;
                for (const auto& l : build_lorentzian_ladder(k.a, k.b, k.c, k.n)) {
                    out.push_back(l.rate);
                }
                return out;
            }
        },
        kind);
}

std::vector<double> hyperpolarize(const ArrowheadSystem& sys, PolarizationTarget target,
                                  std::size_t repetitions, double t_rep) {
    if (!(t_rep > 0.0)) throw DomainError("hyperpolarize: t_rep must be positive");
    const double p_th = sys.p_th();
    const double duration = static_cast<double>(repetitions) * t_rep;

    std::vector<double> out(sys.tls_count(), p_th);
    for (std::size_t k = 0; k < sys.tls_count(); ++k) {
        const double gt = sys.gamma_t()[k];
        const double gqt = sys.rates()[k];
        const double total = gt + gqt;
        if (total == 0.0) continue;
        const double steady = target == PolarizationTarget::excited
                                  ? (gt * p_th + gqt) / total
                                  : gt * p_th / total;
        out[k] = (p_th - steady) * std::exp(-total * duration) + steady;
    }
    return out;
}

double thermal_population(double omega, double temperature) {
    constexpr double hbar = 1.054571817e-34;
    constexpr double k_b = 1.380649e-23;
    if (!(temperature >= 0.0)) throw DomainError("thermal_population: negative temperature");
    if (temperature == 0.0) return omega > 0.0 ? 0.0 : (omega < 0.0 ? 1.0 : 0.5);
    const double x = hbar * omega / (k_b * temperature);
    return 1.0 / (std::exp(x) + 1.0);
}

} // namespace spinbath
