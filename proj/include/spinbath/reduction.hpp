// reduction.hpp: Markov reduction of the Lindblad dynamics to population rate
// equations, cross-relaxation rates, projection onto the Solomon arrowhead
// system, and the Bloch-Redfield limit.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinbath/arrowhead.hpp"
#include "spinbath/liouvillian.hpp"
#include "spinbath/model.hpp"

namespace spinbath {

// exact_inverse: Γ − R^T C^{-1} R with the full coherence block.
// first_order:   C1 and C2 inverted separately, C_r dropped.
// diagonal:      C1, C2 replaced by D1, D2 (pair-only decoherence).
enum class ApproximationLevel { exact_inverse, first_order, diagonal };

struct RateEquation {
    Eigen::MatrixXd l_d;   // acts on the 2^(n+1) diagonal of ρ
    ApproximationLevel level = ApproximationLevel::diagonal;
    std::size_t tls_count = 0;
};

// 2g²Γ₂/(Γ₂² + Δ²). Throws DomainError for Γ₂ <= 0.
double cross_relaxation_rate(double g, double gamma2, double detuning);

struct CrossRelaxationRates {
    std::vector<double> delta_rates;   // Γ_qt^{δ_k}
    std::vector<double> sigma_rates;   // Γ_qt^{σ_k}
    std::vector<double> delta;         // ω_k − ω_q
    std::vector<double> sigma;         // ω_q + ω_k
    std::vector<double> gamma2;        // Γ₂^q + Γ₂^{t_k}
};

CrossRelaxationRates cross_relaxation_rates(const SpinBathModel& model);

// Raised when 4g_k > sqrt(Γ₂ₖ² + δ_k²): the pair is in the damped vacuum-Rabi
// regime and the incoherent rate is unreliable.
struct CoherentRegimeWarning {
    std::size_t tls = 0;   // 0-based
    double g = 0.0;
    double gamma2 = 0.0;
    double delta = 0.0;
};

std::vector<CoherentRegimeWarning> coherent_regime_check(const SpinBathModel& model);

// Throws SingularError naming the qubit–TLS pair with zero mutual decoherence.
RateEquation reduce_populations(const BlockLiouvillian& blocks,
                                ApproximationLevel level = ApproximationLevel::diagonal);

// Rows: indicators "every unit in K is excited" for all subsets K. The first
// n+1 rows are the singletons (p_q, p_t^1..p_t^n), row n+1 the empty set (1).
Eigen::MatrixXd solomon_transform(std::size_t tls_count);

// Γ̄_qt^k = Γ_qt^{δ_k} − Γ_qt^{σ_k}, Γ̄↑↓^k = Γ↑↓^k + Γ_qt^{σ_k},
// Γ̄↑↓^0 = Γ↑↓^0 + Σ Γ_qt^{σ_k}. Throws DomainError if any Γ̄_qt^k < 0.
ArrowheadSystem project_solomon(const SpinBathModel& model,
                                std::vector<CoherentRegimeWarning>* warnings = nullptr);

// Numerical route through S·L_D·S^{-1}. Throws DomainError if the block right
// of Γ̄↑ is not zero or the generator is not arrowhead-shaped.
ArrowheadSystem project_solomon(const RateEquation& eq);

// S·L_D·S^{-1}, exposed for diagnostics.
Eigen::MatrixXd transformed_rate_matrix(const RateEquation& eq);

struct BlochRedfield {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double p_eq = 0.0;
};

BlochRedfield bloch_redfield_limit(const std::function<double(double)>& spectral_density,
                                   const std::function<double(double)>& tls_population,
                                   double omega_q);

// P.V. ∫_{-∞}^{∞} 2ω_q s(ω)/(ω_q² − ω²) dω for symmetric s. The poles at ±ω_q
// are handled by pairing ω_q ± u. breakpoints (ω > 0) split the quadrature at
// sharp features. Throws QuadratureError when the tolerance is not reached.
double lamb_shift(const std::function<double(double)>& s, double omega_q,
                  double quadrature_tol = 1e-10, std::span<const double> breakpoints = {});

} // namespace spinbath
