// asymptotics.hpp: power-law cross-relaxation Γ_qt^k = a/k^d: closed-form Pick
// functions, norm coefficients, approximate roots and long-time limits.
//
// Dimensionless variables: z = a/(λ − Γ_t), γ = (Γ_q − Γ_t)/a, in which
//   f(λ)/a = γ − 1/z − Σ_{k≥1} 1/(z − k^d).

#pragma once

#include <cstddef>

namespace spinbath {

struct AsymptoticParams {
    double a = 1.0;
    double d = 2.0;
    double gamma = 0.0;     // (Γ_q − Γ_t)/a
    double gamma_t = 0.0;
};

// d ∈ {2, 3, 4} use closed forms (d = 3 with a quadrature remainder), other d
// fall back to pick_pole_sum. Throws PoleError within 1e-8 of a pole
// (index = k of the pole z = k^d).
double closed_form_pick(double z, double gamma, double d);

// Σ_{k≤N} evaluated directly plus an Euler–Maclaurin tail for k > N.
double pick_pole_sum(double z, double gamma, double d, std::size_t terms = 100000);

// d = 3 remainder I(w) = J(w) + 2 Re(ω J(−ω w)), ω = e^{2πi/3}, with
// J(u) = ∫₀^∞ (1/(e^t − 1) − 1/t + 1/2) e^{−ut} dt.
double cubic_remainder(double w);

struct NormCoefficients {
    double beta = 0.0;
    double gamma_sq = 0.0;
    bool approximate = false;   // β = 8/d² for d ∉ {2, 3, 4}
};

// ‖v_m‖² ≈ 1/2 + β z_m + γ² z_m².
NormCoefficients norm_coefficients(const AsymptoticParams& p);

struct LongTimeValue {
    double value = 0.0;
    bool early = false;   // (at)^{1/d} < 3: the limit is not reached yet
};

// Long-time p*_q(t) for a total out-of-equilibrium excitation `excess`.
LongTimeValue long_time_pq(double t, const AsymptoticParams& p, double excess);

// Root z(m) between the poles m^d and (m+1)^d from the two-pole model.
double approx_roots(std::size_t m, double gamma, double d);

// δ(m) = z^{1/d} − m − 1/2.
double root_deviation(double z, double d, std::size_t m);

} // namespace spinbath
