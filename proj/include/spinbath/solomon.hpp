// solomon.hpp: exact solution of the Solomon equations through the arrowhead
// secular (Pick) equation.
//
// TLSs sharing one diagonal entry Γ_t^k + Γ_qt^k form a pole group. Only the
// group's coupling norm enters the secular equation; the rest of the group
// relaxes independently at the pole itself.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spinbath/arrowhead.hpp"

namespace spinbath {

// f(λ) = Γ_q + ΣΓ_qt^k − λ − Σ (Γ_qt^k)²/(Γ_t^k + Γ_qt^k − λ).
// Throws PoleError (with the TLS index) if λ hits a pole of a coupled TLS.
double pick_function(double lambda, const ArrowheadSystem& sys);

struct DecoupledMode {
    double rate = 0.0;
    std::size_t multiplicity = 0;
};

// Modal coordinates of a displacement p* = p − p_ss.
struct ModalState {
    std::vector<double> coupled;     // a_m, one per secular root
    std::vector<double> decoupled;   // per pole group, Σ of the decoupled part
};

class SpectralDecomposition {
public:
    // Secular roots, strictly descending, and ‖v_m‖² = −f'(λ_m).
    std::span<const double> eigenvalues() const { return lambda_; }
    std::span<const double> norms() const { return norm_sq_; }
    std::size_t reduced_size() const { return lambda_.size(); }
    std::size_t tls_count() const { return group_of_.size(); }

    // Eigenvalues of the decoupled complement inside each pole group.
    std::vector<DecoupledMode> decoupled() const;
    // Secular roots together with decoupled eigenvalues, descending, n+1 total.
    std::vector<double> all_eigenvalues() const;

    // Coupled poles, descending.
    std::span<const double> poles() const { return pole_; }

    // d_g − λ_m computed from the stored bracket offset.
    double pole_gap(std::size_t group, std::size_t m) const;

    // Eigenvector v_m with leading entry 1, in the caller's TLS order.
    std::vector<double> eigenvector(std::size_t m) const;
    // Σ_k v_m[k] over TLS entries.
    double tls_component_sum(std::size_t m) const { return tls_sum_[m]; }

    ModalState decompose(std::span<const double> p_star) const;
    ModalState advance(const ModalState& s, double dt) const;
    // Per-mode decay factors for a fixed step, reused across many steps.
    ModalState step_factors(double dt) const;
    void apply(ModalState& s, const ModalState& factors) const;
    // Adds delta to the qubit displacement.
    void kick_qubit(ModalState& s, double delta) const;

    double qubit(const ModalState& s) const;
    double tls_excess(const ModalState& s) const;
    // Full displacement vector at time t after state s (O(n·roots)).
    std::vector<double> expand(std::span<const double> p_star0, double t) const;

private:
    friend SpectralDecomposition eigen_decompose(const ArrowheadSystem& sys);

    // Coupled pole groups (w_g > 0), descending.
    std::vector<double> pole_;
    std::vector<double> weight_;     // ‖c_g‖²
    std::vector<double> csum_;       // Σ_{k∈g} Γ_qt^k
    // All groups, including zero-coupling ones.
    std::vector<double> all_pole_;
    std::vector<std::size_t> all_size_;
    std::vector<std::ptrdiff_t> coupled_index_;   // all group -> coupled group or -1
    std::vector<std::size_t> group_of_;           // TLS -> all-group index
    std::vector<double> rate_;                    // Γ_qt^k in caller order

    std::vector<double> lambda_;
    std::vector<double> norm_sq_;
    std::vector<std::size_t> origin_;   // pole λ_m was refined from
    std::vector<double> tau_;           // λ_m = pole_[origin_] + tau_
    std::vector<double> tls_sum_;
};

// Secular roots bracketed by consecutive poles, refined by safeguarded Newton.
// Throws BracketError if a bracket does not contain a sign change.
SpectralDecomposition eigen_decompose(const ArrowheadSystem& sys);

struct Trajectory {
    std::vector<double> times;
    std::vector<double> p_q;
    std::vector<std::vector<double>> p_t;   // p_t[k][i]; empty if qubit_only
    std::vector<double> tls_excess;         // Σ_k (p_t^k − p_ss^k)
};

enum class SolveOutput { full, qubit_only };

Trajectory solve(const ArrowheadSystem& sys, std::span<const double> p0,
                 std::span<const double> times, SolveOutput output = SolveOutput::full);
Trajectory solve(const ArrowheadSystem& sys, const SpectralDecomposition& spec,
                 std::span<const double> p0, std::span<const double> times,
                 SolveOutput output = SolveOutput::full);

// Only the qubit displaced from equilibrium.
std::vector<double> qubit_relaxation(const ArrowheadSystem& sys, double p_q0,
                                     std::span<const double> times);

struct TransitionRates {
    double up = 0.0;
    double down = 0.0;
    double gamma1 = 0.0;
    double p_eq = 0.0;
};

TransitionRates transition_rates(const ArrowheadSystem& sys, std::span<const double> p_t);

// n TLSs with one common rate; populations are absolute (not displacements).
struct IdenticalRatesResult {
    std::vector<double> p_q;
    std::vector<double> p_t;
    double lambda0 = 0.0;
    double lambda2 = 0.0;
};

IdenticalRatesResult identical_rates_solution(std::size_t n, double gamma_qt, double gamma_q,
                                              double gamma_t, double p_th, double p_q0,
                                              double p_t0, std::span<const double> times);

// Σ_h a b²/(b² + (h − bc)²) over all integers h.
double gamma_tlss_lorentzian(double a, double b, double c);

} // namespace spinbath
