// crossrelax2d.hpp: damped Bloch dynamics of the qubit–TLS single-photon
// manifold: x = 2 Re ρ21, y = 2 Im ρ21, z = ρ22 − ρ11,
//
//   d/dt (x, y, z) = −[[Γ₂, δ, 0], [−δ, Γ₂, 2g], [0, −2g, 0]] (x, y, z).
//
// Eigenvalues are −μ_i Γ₂ with μ roots of μ³ − 2μ² + pμ − q,
// p = (Γ₂² + 4g² + δ²)/Γ₂², q = 4g²/Γ₂².
//
// Discriminant convention: D = 4P³ + 27Q² for the depressed cubic y³ + Py + Q,
// so D > 0 means one real root and a complex-conjugate pair.

#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spinbath {

struct ManifoldParams {
    double g = 0.0;
    double delta = 0.0;
    double gamma2 = 1.0;
};

Eigen::Matrix3d bloch_generator(const ManifoldParams& p);

struct CubicRoots {
    // mu[0] is the smallest real root; a complex pair sits in mu[1], mu[2]
    // (positive imaginary part first), real roots are ascending.
    std::array<std::complex<double>, 3> mu;
    double discriminant = 0.0;
    bool complex_pair() const { return discriminant > 0.0; }
};

CubicRoots cubic_roots(const ManifoldParams& p);

// First-order estimate μ0 ≈ 4g²/(Γ₂² + 4g² + δ²).
double mu0_first_order(const ManifoldParams& p);

struct ZTrajectory {
    std::vector<double> z;
    bool fallback = false;   // near-degenerate roots: matrix exponential used
};

ZTrajectory z_of_t(const ManifoldParams& p, double x0, double y0, double z0,
                   std::span<const double> times);

// ∫₀^∞ z(t) dt = (δx0 + Γ₂y0)/(2gΓ₂) + (δ² + Γ₂²)/(4g²Γ₂) z0.
double relaxation_area(const ManifoldParams& p, double x0, double y0, double z0);

struct CoherentFraction {
    double epsilon = 0.0;   // share of z0 not relaxing at μ0Γ₂
    double area = 0.0;      // A(0, 0, z0)
    double z_eff = 0.0;     // polarization reachable from initial coherence
};

CoherentFraction coherent_fraction(const ManifoldParams& p, double z0 = 1.0, double z_max = 1.0);

struct ValidityCell {
    double gamma2 = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;
    double root_error = 0.0;   // |μ0,approx − μ0|/μ0
    int d_sign = 0;
};

struct ValidityMap {
    std::vector<ValidityCell> cells;   // gamma2-major
    // D = 0 contour from linear interpolation along each Γ₂ row, (Γ₂, δ).
    std::vector<std::array<double, 2>> contour;
};

ValidityMap validity_map(double g, std::span<const double> gamma2_grid,
                         std::span<const double> delta_grid);

} // namespace spinbath
