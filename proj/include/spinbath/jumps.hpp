// jumps.hpp: stroboscopic projective qubit readout with Solomon evolution in
// between. Measurement resets the qubit population to 0 or 1 and leaves the
// TLS populations alone.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spinbath/arrowhead.hpp"

namespace spinbath {

inline constexpr const char* rng_id = "mt19937_64+u53-v1";

// Uniform double in [0, 1) from the top 53 bits of one mt19937_64 draw.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

struct JumpOptions {
    std::optional<double> p_q_init;   // default: the qubit steady-state population
    double assignment_error = 0.0;    // symmetric readout flip probability
};

struct JumpTrace {
    std::vector<std::uint8_t> outcomes;   // 1 = e, 0 = g
    std::vector<double> times;            // (k+1)·t_rep
    std::vector<double> p_q_pre;          // qubit population just before readout k
    std::vector<double> tls_excess;       // Σ_k (p_t^k − p_ss^k) at readout k
    std::uint64_t seed = 0;
    double t_rep = 0.0;
};

JumpTrace simulate(const ArrowheadSystem& sys, std::span<const double> p_t_init, double t_rep,
                   std::size_t n_meas, std::uint64_t seed, const JumpOptions& opts = {});

struct Dwell {
    std::uint8_t state = 0;
    std::size_t length = 0;
    bool censored = false;   // touches the start or the end of the trace
};

std::vector<Dwell> dwell_lengths(std::span<const std::uint8_t> outcomes);

struct DwellHistogram {
    std::uint8_t state = 0;
    std::vector<std::size_t> edges;            // bin k is [edges[k], edges[k+1])
    std::vector<std::size_t> counts;
    std::vector<std::size_t> length_counts;    // length_counts[L] = dwells of length L
    std::size_t total = 0;
};

struct DwellHistograms {
    DwellHistogram excited;
    DwellHistogram ground;
};

// Censored dwells are included, so Σ L·length_counts[L] = trace length.
DwellHistograms dwell_histogram(std::span<const std::uint8_t> outcomes, int bins_per_decade = 5);

// Per-step probability of repeating the previous outcome for a Markovian qubit.
struct GeometricLaw {
    double stay_e = 1.0;
    double stay_g = 1.0;
    double stay(std::uint8_t state) const { return state ? stay_e : stay_g; }
    // P(dwell length = L) = s^{L−1}(1 − s)
    double pmf(std::uint8_t state, std::size_t length) const;
    // P(lo ≤ L < hi)
    double bin_probability(std::uint8_t state, std::size_t lo, std::size_t hi) const;
};

GeometricLaw poisson_reference(double gamma_up, double gamma_down, double t_rep);

// Maximum-likelihood geometric law from uncensored dwells, per state.
GeometricLaw fit_geometric(std::span<const Dwell> dwells);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 0.0;
};

// Uncensored dwells of one state vs the geometric law; cells are exact lengths,
// the tail beyond the last cell with expectation ≥ min_expected is pooled.
ChiSquareResult geometric_chi_square(std::span<const Dwell> dwells, std::uint8_t state,
                                     double stay, double min_expected = 5.0);

struct TailBin {
    std::size_t lo = 0, hi = 0;
    double observed = 0.0;
    double expected = 0.0;
    double sigma = 0.0;
    double z = 0.0;
};

// Decade bins of uncensored dwells against a geometric law with binomial σ.
std::vector<TailBin> tail_excess(std::span<const Dwell> dwells, std::uint8_t state, double stay);

} // namespace spinbath
