// arrowhead.hpp: the Solomon rate equations for a qubit and n non-interacting TLSs
//
//   dp/dt = -A p + drive
//
// with the arrowhead generator
//
//   A = [ Γ_q + Σ Γ_qt^k   -Γ_qt^1        ...  -Γ_qt^n        ]
//       [ -Γ_qt^1          Γ_t^1+Γ_qt^1                      ]
//       [ ...                             ...                ]
//       [ -Γ_qt^n                              Γ_t^n+Γ_qt^n  ]
//
// Index 0 is the qubit, index k >= 1 is TLS k. TLSs are kept in the order the
// caller supplied; the spectral solver sorts poles internally.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spinbath {

class ArrowheadSystem {
public:
    ArrowheadSystem() = default;

    // Common intrinsic TLS relaxation and one thermal population for every
    // unit; the drive is (Γ_q, Γ_t, ..., Γ_t) * p_th.
    static ArrowheadSystem thermal(double gamma_q, double gamma_t,
                                   std::vector<double> rates, double p_th);

    // Per-TLS relaxation and an explicit drive vector Γ̄↑ of length n+1.
    static ArrowheadSystem general(double gamma_q, std::vector<double> gamma_t,
                                   std::vector<double> rates,
                                   std::vector<double> drive);

    std::size_t tls_count() const { return rates_.size(); }
    std::size_t size() const { return rates_.size() + 1; }

    double gamma_q() const { return gamma_q_; }
    std::span<const double> gamma_t() const { return gamma_t_; }
    std::span<const double> rates() const { return rates_; }
    std::span<const double> drive() const { return drive_; }

    // Common TLS relaxation, if all TLSs share one.
    std::optional<double> uniform_gamma_t() const;
    // Common thermal population, if the drive is (Γ_q, Γ_t^k) * p_th (detected
    // for general systems).
    std::optional<double> thermal_population() const { return p_th_; }
    // Thermal population; throws DomainError for non-thermal systems.
    double p_th() const;

    // Γ_TLSs = Σ_k Γ_qt^k.
    double gamma_tlss() const;
    // Γ_1 = Γ_q + Γ_TLSs.
    double gamma1() const { return gamma_q_ + gamma_tlss(); }

    // Diagonal of A: A_00 and A_kk = Γ_t^k + Γ_qt^k.
    double qubit_diagonal() const { return gamma1(); }
    double tls_diagonal(std::size_t k) const { return gamma_t_[k] + rates_[k]; }

    // Fixed point of dp/dt = -A p + drive. For a lossless system (A singular)
    // the thermal vector is returned when available, otherwise zeros.
    std::vector<double> steady_state() const;

    Eigen::MatrixXd dense_generator() const;

private:
    double gamma_q_ = 0.0;
    std::vector<double> gamma_t_;
    std::vector<double> rates_;
    std::vector<double> drive_;
    std::optional<double> p_th_;
};

} // namespace spinbath
