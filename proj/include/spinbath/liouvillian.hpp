// liouvillian.hpp: exact Lindblad dynamics of qubit + n TLSs
//
// Basis: index bit j belongs to unit j (bit 0 = qubit, bit k = TLS k); a bit
// value of 0 means excited. Index 0 is therefore all-excited and the last
// index all-ground. For n = 1: 0,1,2,3 <-> |11>,|01>,|10>,|00> with the qubit
// written first and 1 = excited.
//
// Density matrices are vectorized row-major: vec(ρ)[m·D + n] = ρ_mn.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinbath/model.hpp"

namespace spinbath {

using cplx = std::complex<double>;

inline constexpr std::size_t max_exact_tls = 6;
// Dense superoperators above this TLS count do not fit comfortably in memory.
inline constexpr std::size_t max_dense_superoperator_tls = 4;

// H = ω_q/2 σ_q^z + Σ ω_k/2 σ_k^z + Σ g_k σ_q^x σ_k^x
Eigen::MatrixXcd build_hamiltonian(const SpinBathModel& model, std::size_t cap = max_exact_tls);

struct DenseSuperoperator {
    std::size_t tls_count = 0;
    std::size_t hilbert_dim = 0;   // 2^(n+1)
    std::size_t dim = 0;           // 4^(n+1)
    Eigen::MatrixXcd matrix;
};

// L = −i(H⊗1 − 1⊗Hᵀ) + Σ_α L_α⊗L_α − ½(L_αᵀL_α⊗1 + 1⊗L_αᵀL_α) with
// L_α ∈ {√Γ↓ σ⁻, √Γ↑ σ⁺, √(Γ_φ/2) σ^z} per unit.
DenseSuperoperator build_superoperator(const SpinBathModel& model,
                                       std::size_t cap = max_dense_superoperator_tls);

// L applied to ρ without forming the superoperator.
Eigen::MatrixXcd apply_liouvillian(const SpinBathModel& model, const Eigen::MatrixXcd& rho);

enum class CoherenceClass { population, one_photon, two_photon, rest };

// Classifies |m><n| by m xor n: equal → population; qubit bit plus one TLS bit
// → one- or two-photon depending on whether the excitation number is kept.
CoherenceClass classify(std::size_t m, std::size_t n);

class BlockLiouvillian {
public:
    // Sorted order ρ = (ρ_D, ρ_C1, ρ_C2, ρ_Cr).
    std::span<const std::size_t> permutation() const { return perm_; }
    std::size_t population_count() const { return nd_; }
    std::size_t c1_count() const { return n1_; }
    std::size_t c2_count() const { return n2_; }
    std::size_t cr_count() const { return nr_; }
    std::size_t tls_count() const { return tls_; }
    const Eigen::MatrixXcd& sorted() const { return sorted_; }

    Eigen::MatrixXcd gamma_block() const;    // D <- D
    Eigen::MatrixXcd r1() const;             // C1 <- D
    Eigen::MatrixXcd r2() const;             // C2 <- D
    Eigen::MatrixXcd r1_back() const;        // D <- C1
    Eigen::MatrixXcd r2_back() const;        // D <- C2
    Eigen::MatrixXcd c1() const;
    Eigen::MatrixXcd c2() const;
    Eigen::MatrixXcd cr() const;
    Eigen::MatrixXcd cr1() const;            // C1 <- Cr
    Eigen::MatrixXcd cr2() const;            // C2 <- Cr
    Eigen::MatrixXcd coherence_to_population() const;   // D <- all coherences
    Eigen::MatrixXcd population_to_coherence() const;   // all coherences <- D
    Eigen::MatrixXcd coherence_block() const;           // coherences <- coherences

    // (m, n) of each sorted slot.
    std::pair<std::size_t, std::size_t> element(std::size_t slot) const;

    // Inverse permutation back to the original superoperator.
    Eigen::MatrixXcd unsort() const;

private:
    friend BlockLiouvillian sort_blocks(const DenseSuperoperator& sup);

    std::vector<std::size_t> perm_;   // sorted slot -> original vec index
    std::size_t nd_ = 0, n1_ = 0, n2_ = 0, nr_ = 0;
    std::size_t tls_ = 0, hilbert_ = 0;
    Eigen::MatrixXcd sorted_;
};

BlockLiouvillian sort_blocks(const DenseSuperoperator& sup);

// Throws StateError unless ρ is Hermitian, unit-trace and positive (1e-10).
void validate_density_matrix(const Eigen::MatrixXcd& rho);

// Diagonal product state with the given excited-state populations.
Eigen::MatrixXcd product_state(std::span<const double> excited);

// Exact evolution. Dense matrix exponential up to dim 256, Krylov above.
std::vector<Eigen::MatrixXcd> evolve_exact(const DenseSuperoperator& sup,
                                           const Eigen::MatrixXcd& rho0,
                                           std::span<const double> times);

// Same, but matrix-free above n = 3 so that n up to 6 is reachable.
std::vector<Eigen::MatrixXcd> evolve_exact(const SpinBathModel& model,
                                           const Eigen::MatrixXcd& rho0,
                                           std::span<const double> times);

// (p_q, p_t^1..p_t^n): sums of diagonal entries whose unit bit is 0.
std::vector<double> populations(const Eigen::MatrixXcd& rho);

} // namespace spinbath
