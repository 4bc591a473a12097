#include "spinbath/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "spinbath/errors.hpp"
#include "spinbath/solomon.hpp"

namespace spinbath {

JumpTrace simulate(const ArrowheadSystem& sys, std::span<const double> p_t_init, double t_rep,
                   std::size_t n_meas, std::uint64_t seed, const JumpOptions& opts) {
    if (!(t_rep > 0.0) || !std::isfinite(t_rep)) throw DomainError("simulate: t_rep must be positive");
    if (n_meas < 1) throw DomainError("simulate: n_meas must be at least 1");
    if (p_t_init.size() != sys.tls_count()) throw SizeError("simulate: p_t_init has wrong length");
    if (!(opts.assignment_error >= 0.0 && opts.assignment_error <= 0.5)) {
        throw DomainError("simulate: assignment error must lie in [0, 1/2]");
    }

    const std::vector<double> p_ss = sys.steady_state();
    const double p_q0 = opts.p_q_init.value_or(p_ss[0]);
    std::vector<double> p_star(sys.size());
    p_star[0] = p_q0 - p_ss[0];
    for (std::size_t k = 0; k < sys.tls_count(); ++k) {
        const double p = p_t_init[k];
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("simulate: TLS populations must lie in [0, 1]");
        p_star[k + 1] = p - p_ss[k + 1];
    }
    if (!(p_q0 >= 0.0 && p_q0 <= 1.0)) throw DomainError("simulate: p_q_init must lie in [0, 1]");

    const SpectralDecomposition spec = eigen_decompose(sys);
    const ModalState factors = spec.step_factors(t_rep);
    ModalState state = spec.decompose(p_star);
    Rng rng(seed);

    JumpTrace trace;
    trace.seed = seed;
    trace.t_rep = t_rep;
    trace.outcomes.reserve(n_meas);
    trace.times.reserve(n_meas);
    trace.p_q_pre.reserve(n_meas);
    trace.tls_excess.reserve(n_meas);

    for (std::size_t i = 0; i < n_meas; ++i) {
        spec.apply(state, factors);
        const double disp = spec.qubit(state);
        const double p_q = std::clamp(p_ss[0] + disp, 0.0, 1.0);
        const bool excited = rng.uniform() < p_q;
        bool reported = excited;
        if (opts.assignment_error > 0.0 && rng.uniform() < opts.assignment_error) reported = !reported;

        trace.outcomes.push_back(reported ? 1 : 0);
        trace.times.push_back(static_cast<double>(i + 1) * t_rep);
        trace.p_q_pre.push_back(p_q);
        trace.tls_excess.push_back(spec.tls_excess(state));

        spec.kick_qubit(state, (excited ? 1.0 : 0.0) - p_ss[0] - disp);
    }
    return trace;
}

std::vector<Dwell> dwell_lengths(std::span<const std::uint8_t> outcomes) {
    std::vector<Dwell> out;
    std::size_t i = 0;
    while (i < outcomes.size()) {
        std::size_t j = i;
        while (j < outcomes.size() && outcomes[j] == outcomes[i]) ++j;
        out.push_back({outcomes[i], j - i, i == 0 || j == outcomes.size()});
        i = j;
    }
    return out;
}

namespace {

std::vector<std::size_t> log_edges(std::size_t max_length, int per_decade) {
    std::vector<std::size_t> edges{1};
    for (int k = 1; edges.back() <= max_length; ++k) {
        const auto e = static_cast<std::size_t>(std::llround(std::pow(10.0, static_cast<double>(k) / per_decade)));
        if (e > edges.back()) edges.push_back(e);
    }
    return edges;
}

DwellHistogram build(std::span<const Dwell> dwells, std::uint8_t state, int per_decade) {
    DwellHistogram h;
    h.state = state;
    std::size_t max_len = 0;
    for (const auto& d : dwells) {
        if (d.state == state) max_len = std::max(max_len, d.length);
    }
    h.length_counts.assign(max_len + 1, 0);
    for (const auto& d : dwells) {
        if (d.state != state) continue;
        ++h.length_counts[d.length];
        ++h.total;
    }
    h.edges = log_edges(max_len, per_decade);
    h.counts.assign(h.edges.size() - 1, 0);
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
        for (std::size_t L = h.edges[b]; L < h.edges[b + 1] && L <= max_len; ++L) h.counts[b] += h.length_counts[L];
    }
    return h;
}

} // namespace

DwellHistograms dwell_histogram(std::span<const std::uint8_t> outcomes, int bins_per_decade) {
    if (outcomes.empty()) throw DomainError("dwell_histogram: empty trace");
    if (bins_per_decade < 1) throw DomainError("dwell_histogram: bins_per_decade must be positive");
    const auto dwells = dwell_lengths(outcomes);
    return {build(dwells, 1, bins_per_decade), build(dwells, 0, bins_per_decade)};
}

double GeometricLaw::pmf(std::uint8_t state, std::size_t length) const {
    if (length == 0) return 0.0;
    const double s = stay(state);
    return std::pow(s, static_cast<double>(length - 1)) * (1.0 - s);
}

double GeometricLaw::bin_probability(std::uint8_t state, std::size_t lo, std::size_t hi) const {
    lo = std::max<std::size_t>(lo, 1);
    if (hi <= lo) return 0.0;
    const double s = stay(state);
    return std::pow(s, static_cast<double>(lo - 1)) - std::pow(s, static_cast<double>(hi - 1));
}

GeometricLaw poisson_reference(double gamma_up, double gamma_down, double t_rep) {
    if (!(gamma_up >= 0.0) || !(gamma_down >= 0.0)) throw DomainError("poisson_reference: rates must be non-negative");
    if (!(t_rep >= 0.0)) throw DomainError("poisson_reference: t_rep must be non-negative");
    const double g1 = gamma_up + gamma_down;
    GeometricLaw law;
    if (g1 == 0.0) return law;
    const double p_eq = gamma_up / g1;
    const double decay = -std::expm1(-g1 * t_rep);   // 1 − e^{−Γ₁t}
    law.stay_e = 1.0 - (1.0 - p_eq) * decay;
    law.stay_g = 1.0 - p_eq * decay;
    return law;
}

GeometricLaw fit_geometric(std::span<const Dwell> dwells) {
    double sum[2] = {0.0, 0.0};
    double count[2] = {0.0, 0.0};
    for (const auto& d : dwells) {
        if (d.censored) continue;
        sum[d.state] += static_cast<double>(d.length);
        count[d.state] += 1.0;
    }
    GeometricLaw law;
    if (count[1] > 0.0) law.stay_e = 1.0 - count[1] / sum[1];
    if (count[0] > 0.0) law.stay_g = 1.0 - count[0] / sum[0];
    return law;
}

ChiSquareResult geometric_chi_square(std::span<const Dwell> dwells, std::uint8_t state,
                                     double stay, double min_expected) {
    if (!(stay >= 0.0 && stay < 1.0)) throw DomainError("geometric_chi_square: stay must lie in [0, 1)");
    std::vector<double> observed;
    double n = 0.0;
    for (const auto& d : dwells) {
        if (d.censored || d.state != state) continue;
        if (observed.size() <= d.length) observed.resize(d.length + 1, 0.0);
        observed[d.length] += 1.0;
        n += 1.0;
    }
    ChiSquareResult r;
    r.p_value = 1.0;
    if (n == 0.0) return r;

    // Exact-length cells while the expectation stays large enough.
    std::size_t last = 0;
    for (std::size_t L = 1;; ++L) {
        const double e = n * std::pow(stay, static_cast<double>(L - 1)) * (1.0 - stay);
        if (e < min_expected) break;
        const double tail_after = n * std::pow(stay, static_cast<double>(L));
        if (tail_after < min_expected) break;
        last = L;
    }
    std::size_t cells = 0;
    double tail_obs = n;
    for (std::size_t L = 1; L <= last; ++L) {
        const double o = L < observed.size() ? observed[L] : 0.0;
        const double e = n * std::pow(stay, static_cast<double>(L - 1)) * (1.0 - stay);
        r.statistic += (o - e) * (o - e) / e;
        tail_obs -= o;
        ++cells;
    }
    const double tail_exp = n * std::pow(stay, static_cast<double>(last));
    if (tail_exp > 0.0) {
        r.statistic += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
        ++cells;
    }
    if (cells < 2) return r;
    r.dof = cells - 1;
    const boost::math::chi_squared dist(static_cast<double>(r.dof));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

std::vector<TailBin> tail_excess(std::span<const Dwell> dwells, std::uint8_t state, double stay) {
    std::size_t max_len = 0;
    double n = 0.0;
    for (const auto& d : dwells) {
        if (d.censored || d.state != state) continue;
        max_len = std::max(max_len, d.length);
        n += 1.0;
    }
    GeometricLaw law;
    law.stay_e = law.stay_g = stay;
    std::vector<TailBin> out;
    for (std::size_t lo = 1; lo <= max_len; lo *= 10) {
        TailBin b;
        b.lo = lo;
        b.hi = lo * 10;
        for (const auto& d : dwells) {
            if (!d.censored && d.state == state && d.length >= b.lo && d.length < b.hi) b.observed += 1.0;
        }
        const double p = law.bin_probability(state, b.lo, b.hi);
        b.expected = n * p;
        b.sigma = std::sqrt(n * p * (1.0 - p));
        const double diff = b.observed - b.expected;
        b.z = b.sigma > 0.0 ? diff / b.sigma
                            : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        out.push_back(b);
    }
    return out;
}

} // namespace spinbath
