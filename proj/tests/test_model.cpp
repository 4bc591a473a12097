#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "spinbath/errors.hpp"
#include "spinbath/model.hpp"

using namespace spinbath;

TEST_CASE("power law rates") {
    const auto one = build_power_law_rates(1.0, 2.0, 1);
    CHECK(one.rates == std::vector<double>{1.0});

    const auto r = build_power_law_rates(2.0, 3.0, 3);
    REQUIRE(r.rates.size() == 3);
    CHECK(r.rates[0] == 2.0);
    CHECK(r.rates[1] == 0.25);
    CHECK(r.rates[2] == doctest::Approx(2.0 / 27.0).epsilon(1e-15));

    CHECK(power_law_total(1.0, 2.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-14));
    CHECK_THROWS_AS(build_power_law_rates(1.0, 1.0, 10), DomainError);
    CHECK_THROWS_AS(build_power_law_rates(1.0, 0.5, 10), DomainError);
}

TEST_CASE("power law partial sums are monotone and bounded") {
    for (double d : {1.5, 2.0, 3.0, 4.5}) {
        const auto r = build_power_law_rates(1.3, d, 5000);
        CHECK(std::is_sorted(r.rates.rbegin(), r.rates.rend()));
        double s = 0.0;
        for (double x : r.rates) {
            CHECK(x > 0.0);
            s += x;
        }
        const double total = power_law_total(1.3, d);
        CHECK(s < total);
        CHECK(total - s < r.tail_bound + 1e-13 * total);
    }
}

TEST_CASE("lorentzian ladder") {
    const auto l = build_lorentzian_ladder(2.5, 0.7, 0.0, 3);
    REQUIRE(l.size() == 7);
    CHECK(l[0].index == 0);
    CHECK(l[0].rate == 2.5);

    const auto u = build_lorentzian_ladder(1.0, 1.0, 0.0, 1);
    for (const auto& e : u) {
        if (e.index != 0) CHECK(e.rate == 0.5);
    }
    for (std::size_t i = 1; i < l.size(); ++i) CHECK(l[i - 1].rate >= l[i].rate);

    // h -> 2bc − h symmetry when 2bc is an integer
    const double b = 1.5, c = 1.0 / 3.0;   // 2bc = 1
    const auto s = build_lorentzian_ladder(1.0, b, c, 20);
    for (const auto& e : s) {
        const long mirror = 1 - e.index;
        const auto it = std::find_if(s.begin(), s.end(), [&](const LadderRate& x) { return x.index == mirror; });
        if (it != s.end()) CHECK(it->rate == doctest::Approx(e.rate).epsilon(1e-14));
    }
}

TEST_CASE("rate aggregation and distributions") {
    const std::vector<double> rates{0.5, 1.0, 0.5, 0.25, 1.0, 0.5};
    const auto g = aggregate_rates(rates);
    REQUIRE(g.size() == 3);
    CHECK(g[0].rate == 1.0);
    CHECK(g[0].multiplicity == 2);
    CHECK(g[1].multiplicity == 3);
    CHECK(g[2].multiplicity == 1);

    RateDistribution d{ExplicitRates{{0.1, 0.3, 0.2}}};
    CHECK(d.rates() == std::vector<double>{0.3, 0.2, 0.1});
    RateDistribution bad{ExplicitRates{{0.1, 0.0}}};
    CHECK_THROWS_AS(bad.rates(), DomainError);
    RateDistribution pl{PowerLawDistribution{1.0, 2.0, 4}};
    CHECK(pl.rates().size() == 4);
    RateDistribution lad{LorentzianLadderDistribution{1.0, 1.0, 0.0, 2}};
    CHECK(lad.rates().size() == 5);
}

TEST_CASE("hyperpolarization") {
    const auto rates = build_power_law_rates(1.0, 2.0, 20).rates;
    const double p_th = 0.12;

    const auto sys = ArrowheadSystem::thermal(0.3, 0.05, rates, p_th);
    const auto none = hyperpolarize(sys, PolarizationTarget::excited, 0, 1.0);
    for (double p : none) CHECK(p == p_th);

    const auto lossless = ArrowheadSystem::thermal(0.3, 0.0, rates, p_th);
    const auto sat = hyperpolarize(lossless, PolarizationTarget::excited, 100000, 10.0);
    for (double p : sat) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));

    for (std::size_t n : {1u, 10u, 1000u}) {
        const auto up = hyperpolarize(sys, PolarizationTarget::excited, n, 0.5);
        const auto down = hyperpolarize(sys, PolarizationTarget::ground, n, 0.5);
        for (std::size_t k = 0; k < rates.size(); ++k) {
            CHECK(up[k] >= p_th);
            CHECK(up[k] <= 1.0);
            CHECK(down[k] <= p_th);
            CHECK(down[k] >= 0.0);
            // Eq. for the excited target evaluated independently
            const double total = 0.05 + rates[k];
            const double ps = (0.05 * p_th + rates[k]) / total;
            const double expect = (p_th - ps) * std::exp(-total * n * 0.5) + ps;
            CHECK(up[k] == doctest::Approx(expect).epsilon(1e-13));
        }
        // Larger coupling polarizes more.
        for (std::size_t k = 1; k < rates.size(); ++k) CHECK(up[k] <= up[k - 1]);
    }

    // Zero-coupling, zero-relaxation TLS never moves.
    const auto frozen = ArrowheadSystem::thermal(0.3, 0.0, {1.0, 0.0}, p_th);
    const auto f = hyperpolarize(frozen, PolarizationTarget::excited, 50, 1.0);
    CHECK(f[1] == p_th);
}

TEST_CASE("model validation") {
    SpinBathModel m;
    m.tls.push_back({1.0, 0.1, 0.0, 0.1, 0.0});
    CHECK_NOTHROW(m.validate());
    m.tls[0].g = -0.1;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m.tls[0].g = 0.1;
    m.p_th = 1.5;
    CHECK_THROWS_AS(m.validate(), DomainError);

    TlsParams t{1.0, 0.1, 0.2, 0.4, 0.3};
    CHECK(t.gamma2() == doctest::Approx(0.6));

    CHECK(thermal_population(1.0, 0.0) == 0.0);
    CHECK(thermal_population(2 * M_PI * 1e9, 1e6) == doctest::Approx(0.5).epsilon(1e-4));
}
