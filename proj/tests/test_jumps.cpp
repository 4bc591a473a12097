#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "spinbath/errors.hpp"
#include "spinbath/jumps.hpp"
#include "spinbath/model.hpp"
#include "spinbath/solomon.hpp"

using namespace spinbath;

namespace {

std::vector<Dwell> uncensored(const std::vector<Dwell>& d) {
    std::vector<Dwell> out;
    for (const auto& x : d) {
        if (!x.censored) out.push_back(x);
    }
    return out;
}

} // namespace

TEST_CASE("rng") {
    Rng a(17), b(17);
    std::mt19937_64 raw(17);
    for (int i = 0; i < 1000; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(x == static_cast<double>(raw() >> 11) / 9007199254740992.0);
    }
}

TEST_CASE("simulation is deterministic") {
    const auto rates = build_power_law_rates(0.5, 2.0, 50).rates;
    const auto sys = ArrowheadSystem::thermal(0.05, 0.001, rates, 0.12);
    const std::vector<double> pt(50, 0.6);
    const auto t1 = simulate(sys, pt, 0.3, 20000, 123);
    const auto t2 = simulate(sys, pt, 0.3, 20000, 123);
    const auto t3 = simulate(sys, pt, 0.3, 20000, 124);
    CHECK(t1.outcomes == t2.outcomes);
    CHECK(t1.p_q_pre == t2.p_q_pre);
    CHECK(t1.tls_excess == t2.tls_excess);
    CHECK(t1.outcomes != t3.outcomes);
    REQUIRE(t1.outcomes.size() == 20000);
    CHECK(t1.times[0] == 0.3);
    CHECK(t1.times[9] == doctest::Approx(3.0).epsilon(1e-15));
    for (std::size_t i = 0; i < t1.outcomes.size(); ++i) {
        CHECK(t1.p_q_pre[i] >= 0.0);
        CHECK(t1.p_q_pre[i] <= 1.0);
        CHECK(t1.tls_excess[i] >= -50 * 0.12 - 1e-9);
        CHECK(t1.tls_excess[i] <= 50 * 0.88 + 1e-9);
    }

    CHECK_THROWS_AS(simulate(sys, pt, 0.0, 10, 1), DomainError);
    CHECK_THROWS_AS(simulate(sys, pt, 1.0, 0, 1), DomainError);
    CHECK_THROWS_AS(simulate(sys, std::vector<double>(3, 0.5), 1.0, 10, 1), SizeError);
}

TEST_CASE("ground state absorbs without thermal excitation") {
    const auto sys = ArrowheadSystem::thermal(0.5, 0.0, {}, 0.0);
    JumpOptions o;
    o.p_q_init = 1.0;
    const auto t = simulate(sys, {}, 1.0, 5000, 9, o);
    const auto first_g = std::find(t.outcomes.begin(), t.outcomes.end(), 0);
    REQUIRE(first_g != t.outcomes.end());
    CHECK(std::all_of(first_g, t.outcomes.end(), [](std::uint8_t x) { return x == 0; }));
}

TEST_CASE("dwell lengths and histograms") {
    const std::vector<std::uint8_t> alt{0, 1, 0, 1, 0, 1, 0};
    for (const auto& d : dwell_lengths(alt)) CHECK(d.length == 1);

    const std::vector<std::uint8_t> flat(40, 1);
    const auto one = dwell_lengths(flat);
    REQUIRE(one.size() == 1);
    CHECK(one[0].length == 40);
    CHECK(one[0].censored);

    const std::vector<std::uint8_t> mix{1, 1, 0, 1, 0, 0, 0};
    const auto d = dwell_lengths(mix);
    REQUIRE(d.size() == 4);
    CHECK(d[0].length == 2);
    CHECK(d[0].censored);
    CHECK(d[1].length == 1);
    CHECK_FALSE(d[1].censored);
    CHECK(d[2].state == 1);
    CHECK(d[3].length == 3);
    CHECK(d[3].censored);

    std::vector<std::uint8_t> trace;
    Rng rng(5);
    for (int i = 0; i < 100000; ++i) trace.push_back(rng.uniform() < 0.3 ? 1 : 0);
    const auto h = dwell_histogram(trace, 5);
    std::size_t covered = 0;
    for (const auto* s : {&h.excited, &h.ground}) {
        CHECK(std::accumulate(s->counts.begin(), s->counts.end(), std::size_t{0}) == s->total);
        for (std::size_t L = 0; L < s->length_counts.size(); ++L) covered += L * s->length_counts[L];
        CHECK(s->edges.front() == 1);
        for (std::size_t k = 1; k < s->edges.size(); ++k) CHECK(s->edges[k] > s->edges[k - 1]);
        CHECK(s->edges.size() == s->counts.size() + 1);
    }
    CHECK(covered == trace.size());
}

TEST_CASE("geometric reference law") {
    const auto absorbing = poisson_reference(0.0, 0.4, 2.0);
    CHECK(absorbing.stay_g == 1.0);
    CHECK(absorbing.stay_e == doctest::Approx(std::exp(-0.8)));
    const auto fast = poisson_reference(0.3, 0.4, 1e-12);
    CHECK(fast.stay_e == doctest::Approx(1.0));
    CHECK(fast.stay_g == doctest::Approx(1.0));

    // Two-state propagator.
    const double up = 0.07, down = 0.31, t = 1.7;
    Eigen::Matrix2d q;
    q << -down, up, down, -up;   // columns: from e, from g
    const Eigen::Matrix2d prop = (q * t).exp();
    const auto law = poisson_reference(up, down, t);
    CHECK(law.stay_e == doctest::Approx(prop(0, 0)).epsilon(1e-13));
    CHECK(law.stay_g == doctest::Approx(prop(1, 1)).epsilon(1e-13));

    double total = 0.0;
    for (std::size_t L = 1; L < 2000; ++L) total += law.pmf(1, L);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(law.bin_probability(0, 3, 10) ==
          doctest::Approx(std::pow(law.stay_g, 2) - std::pow(law.stay_g, 9)).epsilon(1e-13));
}

TEST_CASE("markovian qubit passes the chi-square test") {
    const double p_th = 0.12;
    const auto sys = ArrowheadSystem::thermal(0.2, 0.0, {}, p_th);
    const double t_rep = 1.0;
    const auto trace = simulate(sys, {}, t_rep, 1000000, 2024);
    const auto r = transition_rates(sys, {});
    const auto law = poisson_reference(r.up, r.down, t_rep);
    const auto dw = dwell_lengths(trace.outcomes);
    for (std::uint8_t s : {0, 1}) {
        const auto chi = geometric_chi_square(dw, s, law.stay(s));
        CHECK(chi.dof > 3);
        CHECK(chi.p_value > 0.01);
    }

    // Transition matrix vs propagator, 3σ.
    double n[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 1; i < trace.outcomes.size(); ++i) n[trace.outcomes[i - 1]][trace.outcomes[i]] += 1;
    for (int s : {0, 1}) {
        const double total = n[s][0] + n[s][1];
        const double p = law.stay(static_cast<std::uint8_t>(s));
        const double sigma = std::sqrt(p * (1 - p) / total);
        CHECK(std::abs(n[s][s] / total - p) < 3 * sigma);
    }

    // Fitted law agrees with the reference.
    const auto fit = fit_geometric(dw);
    CHECK(fit.stay_e == doctest::Approx(law.stay_e).epsilon(0.01));
    CHECK(fit.stay_g == doctest::Approx(law.stay_g).epsilon(0.01));

    // A wrong law is rejected.
    CHECK(geometric_chi_square(dw, 1, law.stay_e * 0.95).p_value < 1e-6);
    // No tail excess.
    for (const auto& b : tail_excess(dw, 1, law.stay_e)) CHECK(b.z < 4.0);
}

TEST_CASE("lossless traces conserve total excess between readouts") {
    const auto rates = build_power_law_rates(0.3, 2.0, 30).rates;
    const auto sys = ArrowheadSystem::thermal(0.0, 0.0, rates, 0.12);
    std::vector<double> pt(30, 0.12);
    for (std::size_t k = 0; k < 5; ++k) pt[k] = 0.9;
    const auto t = simulate(sys, pt, 0.5, 5000, 77);
    const double p_ss = 0.12;
    double prev = (0.12 - p_ss) + 5 * (0.9 - 0.12);
    for (std::size_t i = 0; i < t.outcomes.size(); ++i) {
        const double now = (t.p_q_pre[i] - p_ss) + t.tls_excess[i];
        CHECK(std::abs(now - prev) < 1e-10);
        prev = (t.outcomes[i] - p_ss) + t.tls_excess[i];
    }
}

TEST_CASE("assignment error") {
    const double p_th = 0.2, eps = 0.1;
    const auto sys = ArrowheadSystem::thermal(50.0, 0.0, {}, p_th);
    JumpOptions o;
    o.assignment_error = eps;
    const std::size_t n = 200000;
    const auto t = simulate(sys, {}, 1.0, n, 3, o);
    const double f = std::accumulate(t.outcomes.begin(), t.outcomes.end(), 0.0) / n;
    const double expect = p_th * (1 - eps) + (1 - p_th) * eps;
    CHECK(std::abs(f - expect) < 4 * std::sqrt(expect * (1 - expect) / n));
    o.assignment_error = 0.6;
    CHECK_THROWS_AS(simulate(sys, {}, 1.0, 10, 3, o), DomainError);
}

TEST_CASE("censored dwells stay out of the statistics") {
    const std::vector<std::uint8_t> tr{1, 1, 1, 0, 1, 1, 0, 0};
    const auto dw = dwell_lengths(tr);
    const auto fit = fit_geometric(dw);
    // Only the middle e dwell (length 2) and the single g dwell count.
    CHECK(fit.stay_e == doctest::Approx(0.5));
    CHECK(fit.stay_g == doctest::Approx(0.0));
    CHECK(uncensored(dw).size() == 2);
}

TEST_CASE("heated bath gives a heavy excited-dwell tail") {
    const auto rates = build_power_law_rates(1.0, 2.0, 200).rates;
    const auto sys = ArrowheadSystem::thermal(0.05, 1e-4, rates, 0.12);
    const double t_rep = 0.05;
    const auto pt = hyperpolarize(sys, PolarizationTarget::excited, 100000, t_rep);
    CHECK(std::accumulate(pt.begin(), pt.end(), 0.0) > 200 * 0.12 + 10.0);
    const auto trace = simulate(sys, pt, t_rep, 1000000, 1);
    const auto dw = dwell_lengths(trace.outcomes);
    const auto fit = fit_geometric(dw);
    bool heavy = false;
    for (const auto& b : tail_excess(dw, 1, fit.stay_e)) {
        if (b.lo >= 10 && b.observed >= 5 && b.z > 3.0) heavy = true;
    }
    CHECK(heavy);
    CHECK(geometric_chi_square(dw, 1, fit.stay_e).p_value < 1e-6);
}
