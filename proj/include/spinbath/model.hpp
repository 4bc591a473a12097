// model.hpp: physical parameters of a qubit coupled to a discrete TLS bath,
// cross-relaxation rate distributions and hyperpolarized initial conditions.
//
// All frequencies and rates are angular and in one consistent unit; nothing
// in the library converts units.

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "spinbath/arrowhead.hpp"

namespace spinbath {

struct TlsParams {
    double omega = 0.0;       // transition frequency
    double g = 0.0;           // σ_q^x σ_k^x coupling
    double gamma_up = 0.0;
    double gamma_down = 0.0;
    double gamma_phi = 0.0;

    double gamma1() const { return gamma_up + gamma_down; }
    // Γ₂ = Γ_φ + Γ₁/2
    double gamma2() const { return gamma_phi + 0.5 * gamma1(); }
};

struct SpinBathModel {
    double omega_q = 1.0;
    std::vector<TlsParams> tls;
    double gamma_q_up = 0.0;
    double gamma_q_down = 0.0;
    double gamma_q_phi = 0.0;
    double p_th = 0.0;

    std::size_t tls_count() const { return tls.size(); }
    double qubit_gamma1() const { return gamma_q_up + gamma_q_down; }
    double qubit_gamma2() const { return gamma_q_phi + 0.5 * qubit_gamma1(); }

    // Throws DomainError on negative rates/couplings or p_th outside [0, 1].
    void validate() const;
};

// Γ_qt^k = a / k^d for k = 1..n, descending. tail_bound bounds the omitted
// remainder Σ_{k>n} a/k^d from above.
struct PowerLawRates {
    std::vector<double> rates;
    double tail_bound = 0.0;
};

PowerLawRates build_power_law_rates(double a, double d, std::size_t n);

// a ζ(d), the n → ∞ limit of Σ Γ_qt^k.
double power_law_total(double a, double d);

// Γ_qt^h = a b² / (b² + (h - b c)²) for h in [-n, n], sorted descending with
// the detuning index h retained.
struct LadderRate {
    double rate = 0.0;
    long index = 0;
};

std::vector<LadderRate> build_lorentzian_ladder(double a, double b, double c, std::size_t n);

// Collapses equal rates into (rate, multiplicity) groups, descending.
struct RateGroup {
    double rate = 0.0;
    std::size_t multiplicity = 0;
};

std::vector<RateGroup> aggregate_rates(std::span<const double> rates);

struct ExplicitRates {
    std::vector<double> rates;
};

struct PowerLawDistribution {
    double a = 1.0;
    double d = 2.0;
    std::size_t n = 1;
};

struct LorentzianLadderDistribution {
    double a = 1.0;
    double b = 1.0;
    double c = 0.0;
    std::size_t n = 1;   // h runs over [-n, n]
};

struct RateDistribution {
    std::variant<ExplicitRates, PowerLawDistribution, LorentzianLadderDistribution> kind;

    // Materialized rates, descending. Throws DomainError on invalid parameters.
    std::vector<double> rates() const;
};

enum class PolarizationTarget { ground, excited };

// TLS populations after N stroboscopic qubit preparations with period t_rep.
// A TLS with Γ_t = Γ_qt = 0 keeps its thermal population.
std::vector<double> hyperpolarize(const ArrowheadSystem& sys, PolarizationTarget target,
                                  std::size_t repetitions, double t_rep);

// Fermi-Dirac occupation 1/(exp(ħω/k_B T) + 1); omega in rad/s, T in kelvin.
double thermal_population(double omega, double temperature);

} // namespace spinbath
