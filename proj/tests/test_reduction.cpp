#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "spinbath/crossrelax2d.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/reduction.hpp"
#include "spinbath/solomon.hpp"

using namespace spinbath;

namespace {

// Weakly coupled, strongly dephased model: Γ₂/g ≥ ratio.
SpinBathModel overdamped(std::mt19937_64& rng, std::size_t n, double ratio) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpinBathModel m;
    m.omega_q = 5.0;
    m.gamma_q_up = 0.002 * u(rng);
    m.gamma_q_down = 0.01 * u(rng);
    m.gamma_q_phi = 0.5 + 0.5 * u(rng);
    for (std::size_t k = 0; k < n; ++k) {
        TlsParams t{5.0 + 0.4 * (u(rng) - 0.5), 0.0, 0.002 * u(rng), 0.01 * u(rng), 0.5 + 0.5 * u(rng)};
        m.tls.push_back(t);
    }
    for (auto& t : m.tls) t.g = (m.qubit_gamma2() + t.gamma2()) / ratio * (0.5 + 0.5 * u(rng));
    return m;
}

std::vector<double> sorted_real(const Eigen::VectorXcd& ev) {
    std::vector<double> out;
    for (const auto& x : ev) out.push_back(x.real());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

} // namespace

TEST_CASE("cross relaxation rate") {
    CHECK(cross_relaxation_rate(1.0, 2.0, 0.0) == 1.0);
    CHECK(cross_relaxation_rate(1.0, 2.0, 2.0) == 0.5);
    CHECK_THROWS_AS(cross_relaxation_rate(1.0, 0.0, 1.0), DomainError);

    // Maximum over Γ₂ at Γ₂ = |Δ|.
    const double delta = 0.37;
    double best = 0.0, arg = 0.0;
    for (int i = 1; i < 20000; ++i) {
        const double g2 = i * 1e-4;
        const double r = cross_relaxation_rate(0.1, g2, delta);
        if (r > best) {
            best = r;
            arg = g2;
        }
    }
    CHECK(arg == doctest::Approx(delta).epsilon(1e-3));

    // Weak coupling: Γ_qt ≈ μ0Γ₂/2 from the single-photon Bloch cubic.
    for (double ratio : {10.0, 30.0, 100.0}) {
        const double g = 0.1, g2 = ratio * 4 * g, d = 0.7 * g2;
        const double mu0 = cubic_roots({g, d, g2}).mu[0].real();
        const double rel = std::abs(mu0 * g2 / 2.0 / cross_relaxation_rate(g, g2, d) - 1.0);
        CHECK(rel < 4.0 * std::pow(4.0 * g / g2, 2));
    }

    SpinBathModel m;
    m.omega_q = 1.0;
    m.tls.push_back({1.2, 0.1, 0.0, 0.05, 0.2});
    const auto cr = cross_relaxation_rates(m);
    CHECK(cr.delta[0] == doctest::Approx(0.2));
    CHECK(cr.sigma[0] == doctest::Approx(2.2));
    CHECK(cr.sigma_rates[0] <= cr.delta_rates[0]);
}

TEST_CASE("single-TLS rate matrix structure") {
    SpinBathModel m;
    m.omega_q = 2.0;
    m.gamma_q_down = 0.01;
    m.gamma_q_phi = 0.3;
    m.tls.push_back({2.3, 0.05, 0.002, 0.01, 0.4});
    const auto blocks = sort_blocks(build_superoperator(m));
    const auto cr = cross_relaxation_rates(m);
    for (auto level : {ApproximationLevel::exact_inverse, ApproximationLevel::first_order,
                       ApproximationLevel::diagonal}) {
        const auto eq = reduce_populations(blocks, level);
        const double tol = level == ApproximationLevel::exact_inverse ? 1e-3 : 1e-14;
        // |01> <-> |10> flip-flop at Γδ, |11> <-> |00> flip-flip at Γσ
        CHECK(eq.l_d(2, 1) == doctest::Approx(cr.delta_rates[0]).epsilon(tol));
        CHECK(eq.l_d(1, 2) == doctest::Approx(cr.delta_rates[0]).epsilon(tol));
        CHECK(eq.l_d(3, 0) == doctest::Approx(cr.sigma_rates[0]).epsilon(tol));
        CHECK(eq.l_d(0, 3) == doctest::Approx(cr.sigma_rates[0]).epsilon(tol));
    }
    const auto a = reduce_populations(blocks, ApproximationLevel::first_order);
    const auto b = reduce_populations(blocks, ApproximationLevel::diagonal);
    CHECK((a.l_d - b.l_d).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rate equation is a generator") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = overdamped(rng, 2, 10.0);
        const auto blocks = sort_blocks(build_superoperator(m));
        for (auto level : {ApproximationLevel::exact_inverse, ApproximationLevel::first_order,
                           ApproximationLevel::diagonal}) {
            const auto eq = reduce_populations(blocks, level);
            const double scale = eq.l_d.cwiseAbs().maxCoeff();
            CHECK(eq.l_d.colwise().sum().cwiseAbs().maxCoeff() < 1e-12 * scale);
            for (Eigen::Index i = 0; i < eq.l_d.rows(); ++i)
                for (Eigen::Index j = 0; j < eq.l_d.cols(); ++j)
                    if (i != j) {
                        // The non-diagonal levels carry small negative cross terms of
                        // order (Γ↑↓/Γ₂)(g/Γ₂)²; only the default level is a strict generator.
                        const double floor = level == ApproximationLevel::diagonal ? 1e-12 : 1e-3;
                        CHECK(eq.l_d(i, j) >= -floor * scale);
                    }
            // Total probability conserved under e^{L_D t}.
            const Eigen::VectorXd p = Eigen::VectorXd::Constant(eq.l_d.rows(), 1.0 / eq.l_d.rows());
            const Eigen::VectorXd q = (eq.l_d * 7.0).exp() * p;
            CHECK(std::abs(q.sum() - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("approximation levels converge") {
    std::mt19937_64 rng(8);
    const SpinBathModel base = overdamped(rng, 2, 10.0);
    auto reduce = [](const SpinBathModel& m, ApproximationLevel level) {
        return reduce_populations(sort_blocks(build_superoperator(m)), level).l_d;
    };

    // diagonal vs first_order: linear in the intrinsic rates.
    std::vector<double> diag_err;
    for (double scale : {1.0, 0.1, 0.01}) {
        SpinBathModel m = base;
        m.gamma_q_down = 0.2 * scale;
        m.gamma_q_up = 0.05 * scale;
        for (auto& t : m.tls) {
            t.gamma_down = 0.2 * scale;
            t.gamma_up = 0.1 * scale;
        }
        const auto first = reduce(m, ApproximationLevel::first_order);
        diag_err.push_back((reduce(m, ApproximationLevel::diagonal) - first).norm());
    }
    CHECK(diag_err[1] < 0.2 * diag_err[0]);
    CHECK(diag_err[2] < 0.2 * diag_err[1]);

    // first_order vs exact_inverse: the dropped C_r paths vanish with (g/Γ₂)².
    std::vector<double> first_err;
    for (double scale : {1.0, 0.3, 0.1}) {
        SpinBathModel m = base;
        m.gamma_q_down = 0.2;
        for (auto& t : m.tls) {
            t.gamma_down = 0.2;
            t.g *= scale;
        }
        const auto ex = reduce(m, ApproximationLevel::exact_inverse);
        first_err.push_back((reduce(m, ApproximationLevel::first_order) - ex).norm() / ex.norm());
    }
    CHECK(first_err[1] < 0.2 * first_err[0]);
    CHECK(first_err[2] < 0.2 * first_err[1]);

    // Lossless TLSs: first_order and diagonal coincide.
    SpinBathModel m = overdamped(rng, 3, 10.0);
    for (auto& t : m.tls) t.gamma_up = t.gamma_down = 0.0;
    const auto blocks = sort_blocks(build_superoperator(m));
    const auto a = reduce_populations(blocks, ApproximationLevel::first_order).l_d;
    const auto b = reduce_populations(blocks, ApproximationLevel::diagonal).l_d;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("slow spectrum matches the full Liouvillian") {
    std::mt19937_64 rng(17);
    const auto m = overdamped(rng, 2, 10.0);
    const auto sup = build_superoperator(m);
    const auto eq = reduce_populations(sort_blocks(sup), ApproximationLevel::diagonal);
    const auto full = sorted_real(Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(sup.matrix).eigenvalues());
    const auto slow = sorted_real(Eigen::EigenSolver<Eigen::MatrixXd>(eq.l_d).eigenvalues().cast<cplx>());
    const double floor = std::abs(slow.back());
    for (std::size_t i = 0; i < slow.size(); ++i) {
        CHECK(std::abs(full[i] - slow[i]) <= 0.05 * std::max(std::abs(slow[i]), 1e-3 * floor));
    }
}

TEST_CASE("projection onto the Solomon system") {
    std::mt19937_64 rng(23);
    for (std::size_t n : {0u, 1u, 2u, 3u}) {
        const auto m = overdamped(rng, n, 10.0);
        const auto eq = reduce_populations(sort_blocks(build_superoperator(m)));
        const Eigen::MatrixXd t = transformed_rate_matrix(eq);
        const auto units = static_cast<Eigen::Index>(n + 1);
        if (t.cols() > units + 1) {
            CHECK(t.block(0, units + 1, units, t.cols() - units - 1).cwiseAbs().maxCoeff() <=
                  1e-12 * eq.l_d.cwiseAbs().maxCoeff());
        }
        const auto numeric = project_solomon(eq);
        const auto analytic = project_solomon(m);
        const double s = analytic.gamma1();
        CHECK(std::abs(numeric.gamma_q() - analytic.gamma_q()) < 1e-10 * s);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(std::abs(numeric.rates()[k] - analytic.rates()[k]) < 1e-10 * s);
            CHECK(std::abs(numeric.gamma_t()[k] - analytic.gamma_t()[k]) < 1e-10 * s);
        }
        for (std::size_t i = 0; i <= n; ++i) CHECK(std::abs(numeric.drive()[i] - analytic.drive()[i]) < 1e-10 * s);

        // Partial traces of e^{L_D t} vs. the Solomon solution.
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> p0(n + 1);
        for (double& p : p0) p = u(rng);
        const std::size_t dim = std::size_t{1} << (n + 1);
        Eigen::VectorXd rho(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            double pr = 1.0;
            for (std::size_t j = 0; j <= n; ++j) pr *= ((i >> j) & 1u) ? 1.0 - p0[j] : p0[j];
            rho[static_cast<Eigen::Index>(i)] = pr;
        }
        const std::vector<double> times{0.0, 1.0, 10.0, 100.0};
        const auto traj = solve(analytic, p0, times);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const Eigen::VectorXd r = (eq.l_d * times[k]).exp() * rho;
            for (std::size_t j = 0; j <= n; ++j) {
                double p = 0.0;
                for (std::size_t i = 0; i < dim; ++i)
                    if (!((i >> j) & 1u)) p += r[static_cast<Eigen::Index>(i)];
                const double sol = j == 0 ? traj.p_q[k] : traj.p_t[j - 1][k];
                CHECK(std::abs(p - sol) < 1e-9);
            }
        }
    }

    SpinBathModel q;
    q.gamma_q_up = 0.1;
    q.gamma_q_down = 0.3;
    const auto s0 = project_solomon(q);
    CHECK(s0.size() == 1);
    CHECK(s0.dense_generator()(0, 0) == doctest::Approx(0.4));
    CHECK(s0.drive()[0] == doctest::Approx(0.1));

    // Γ₂ ≪ ω_q: two-photon terms negligible.
    SpinBathModel far;
    far.omega_q = 1e4;
    far.gamma_q_phi = 1.0;
    far.tls.push_back({1e4 + 0.5, 0.05, 0.0, 0.0, 1.0});
    const auto sf = project_solomon(far);
    const auto crf = cross_relaxation_rates(far);
    CHECK(std::abs(sf.rates()[0] / crf.delta_rates[0] - 1.0) < 1e-6);

    SpinBathModel bad;
    bad.omega_q = 1.0;
    bad.gamma_q_phi = 0.5;
    bad.tls.push_back({-0.5, 0.05, 0.0, 0.0, 0.5});
    CHECK_THROWS_AS(project_solomon(bad), DomainError);
}

TEST_CASE("coherent regime warning and singular coherences") {
    SpinBathModel m;
    m.omega_q = 1.0;
    m.gamma_q_phi = 0.1;
    m.tls.push_back({1.0, 0.2, 0.0, 0.0, 0.1});
    m.tls.push_back({1.0, 0.001, 0.0, 0.0, 0.1});
    std::vector<CoherentRegimeWarning> w;
    project_solomon(m, &w);
    REQUIRE(w.size() == 1);
    CHECK(w[0].tls == 0);

    SpinBathModel z;
    z.omega_q = 1.0;
    z.tls.push_back({1.0, 0.1, 0.0, 0.0, 0.0});
    const auto blocks = sort_blocks(build_superoperator(z));
    for (auto level : {ApproximationLevel::exact_inverse, ApproximationLevel::first_order,
                       ApproximationLevel::diagonal}) {
        try {
            reduce_populations(blocks, level);
            FAIL("expected SingularError");
        } catch (const SingularError& e) {
            CHECK(std::string(e.what()).find("TLS 1") != std::string::npos);
        }
    }
}

TEST_CASE("Bloch-Redfield limit and Lamb shift") {
    const auto br = bloch_redfield_limit([](double) { return 0.3; }, [](double) { return 0.1; }, 2.0);
    CHECK(br.gamma1 == doctest::Approx(2 * M_PI * 0.3));
    CHECK(br.gamma2 == doctest::Approx(M_PI * 0.3));
    CHECK(br.p_eq == 0.1);

    const double wq = 1.0;
    const auto lor = [](double w) { return 0.01 / (1.0 + (w - 5.0) * (w - 5.0)); };
    const auto br2 = bloch_redfield_limit(lor, [](double) { return 0.0; }, wq);
    CHECK(br2.gamma1 == doctest::Approx(2 * M_PI * lor(wq)));

    const auto fermi = [](double w) { return 1.0 / (std::exp(w / 0.7) + 1.0); };
    CHECK(bloch_redfield_limit(lor, fermi, wq).p_eq == fermi(wq));

    CHECK(std::abs(lamb_shift([](double) { return 0.2; }, wq, 1e-12)) < 1e-9);

    // Finite flat band: only the band edges contribute.
    const double c = 0.2;
    const auto flat = [&](double w) { return std::abs(w) < 50.0 ? c : 0.0; };
    const std::vector<double> cut{50.0};
    const double flat_shift = lamb_shift(flat, wq, 1e-12, cut);
    const double flat_ref = 2.0 * c * std::log((50.0 + wq) / (50.0 - wq));   // finite band edge
    CHECK(std::abs(flat_shift - flat_ref) < 1e-9);

    // Narrow mirrored bump of total weight A at ±ω0.
    const double a = 0.3, w0 = 3.0, width = 0.005;
    const auto bump = [&](double w) {
        const auto g = [&](double x) { return std::exp(-0.5 * x * x / (width * width)) / (width * std::sqrt(2 * M_PI)); };
        return 0.5 * a * (g(w - w0) + g(w + w0));
    };
    const std::vector<double> bp{w0 - 0.1, w0, w0 + 0.1};
    const double shift = lamb_shift(bump, wq, 1e-12, bp);
    const double ref = 2.0 * wq * a / (wq * wq - w0 * w0);
    CHECK(shift < 0.0);
    CHECK(std::abs(shift / ref - 1.0) < 1e-3);

    // Box symmetric about ω_q: the pole parts cancel, the smooth remainder is logarithmic.
    const double u0 = 0.25;
    const auto box = [&](double w) { return std::abs(std::abs(w) - wq) < u0 ? c : 0.0; };
    const std::vector<double> edges{wq - u0, wq + u0};
    const double box_shift = lamb_shift(box, wq, 1e-12, edges);
    CHECK(std::abs(box_shift - 2.0 * c * std::log((2 * wq + u0) / (2 * wq - u0))) < 1e-10);
}
