#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <complex>
#include <span>

#include <unsupported/Eigen/MatrixFunctions>

#include "cli.hpp"
#include "config.hpp"
#include "spinbath/asymptotics.hpp"
#include "spinbath/crossrelax2d.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/jumps.hpp"
#include "spinbath/liouvillian.hpp"
#include "spinbath/reduction.hpp"
#include "spinbath/solomon.hpp"

namespace spinbath::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void check_version(Reader& r) {
    if (!r.has("schema_version")) return;
    const json& v = r.raw("schema_version");
    if (!v.is_number_integer() || v.get<long long>() != schema_version) {
        throw ConfigError("schema_version: unsupported (expected " + std::to_string(schema_version) + ")");
    }
}

std::uint64_t pick_seed(const Invocation& inv, Reader& r) {
    const std::uint64_t from_config = r.count("seed", 0);
    return inv.seed.value_or(from_config);
}

json with_seed(json config, std::uint64_t seed) {
    config["seed"] = seed;
    return config;
}

// relax ---------------------------------------------------------------------

CommandResult relax(const Invocation& inv, std::ostream& log) {
    Reader r(inv.config, "");
    check_version(r);
    const SystemConfig sc = read_system(r);
    const InitialConfig init = read_initial(r);
    const auto times = grid(r.raw("times"), "times");
    const bool asymptote = r.boolean("asymptote", false);
    const bool cross_check = r.boolean("cross_check", false);
    r.finish();
    for (double t : times) {
        if (!(t >= 0.0)) throw ConfigError("times: must be non-negative");
    }

    const ArrowheadSystem sys = sc.build();
    const std::size_t n = sys.tls_count();
    const std::vector<double> p_t0 = init.tls_populations(sys, sc.p_th);
    const double p_q0 = init.p_q.value_or(1.0);
    std::vector<double> p0{p_q0};
    p0.insert(p0.end(), p_t0.begin(), p_t0.end());

    const Trajectory tr = solve(sys, p0, times);
    const double total = sys.gamma_tlss();

    std::optional<AsymptoticParams> ap;
    double excess = 0.0;
    if (asymptote) {
        const auto* pl = sc.power_law();
        if (!pl) throw ConfigError("asymptote: needs system.rates.power_law");
        ap = AsymptoticParams{pl->a, pl->d, (sc.gamma_q - sc.gamma_t) / pl->a, sc.gamma_t};
        for (double p : p0) excess += p - sc.p_th;
    }

    Table t{{"t", "p_q", "p_eq", "gamma_up", "gamma_down", "p_eq_tlss"}, {}};
    if (ap) t.columns.push_back("asymptote");
    std::vector<double> pt(n);
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k) pt[k] = tr.p_t[k][i];
        const TransitionRates rates = transition_rates(sys, pt);
        double tls_eq = nan;
        if (total > 0.0) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += sys.rates()[k] * pt[k];
            tls_eq = s / total;
        }
        std::vector<double> row{times[i], tr.p_q[i], rates.p_eq, rates.up, rates.down, tls_eq};
        if (ap) row.push_back(times[i] > 0.0 ? sc.p_th + long_time_pq(times[i], *ap, excess).value : nan);
        t.add(std::move(row));
    }

    CommandResult res;
    res.files.push_back(write_table(inv.out, "relax", t, inv.format));

    if (cross_check) {
        const auto groups = aggregate_rates(sys.rates());
        const bool uniform = std::all_of(p_t0.begin(), p_t0.end(), [&](double x) { return x == p_t0.front(); });
        if (groups.size() != 1 || !uniform) {
            throw ConfigError("cross_check: needs identical rates and one initial TLS population");
        }
        const auto cf = identical_rates_solution(n, groups[0].rate, sc.gamma_q, sc.gamma_t, sc.p_th, p_q0,
                                                 p_t0.front(), times);
        double err = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            err = std::max({err, std::abs(cf.p_q[i] - tr.p_q[i]), std::abs(cf.p_t[i] - tr.p_t[0][i])});
        }
        const double tol = 1e-10;
        const bool ok = err <= tol;
        write_json(inv.out / "cross_check.json", {{"check", "identical_rates_closed_form"},
                                                 {"max_abs_error", err},
                                                 {"tolerance", tol},
                                                 {"passed", ok}});
        res.files.push_back("cross_check.json");
        log << "identical-rates cross-check: max error " << err << (ok ? " (ok)" : " (FAILED)") << '\n';
        if (!ok) res.status = exit_validation;
    }
    res.effective_config = inv.config;
    return res;
}

// jumps ---------------------------------------------------------------------

Table histogram_table(const DwellHistogram& h) {
    Table t{{"bin_lo", "bin_hi", "count", "freq"}, {}};
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double freq = h.total ? static_cast<double>(h.counts[k]) / static_cast<double>(h.total) : 0.0;
        t.add({static_cast<double>(h.edges[k]), static_cast<double>(h.edges[k + 1]),
               static_cast<double>(h.counts[k]), freq});
    }
    return t;
}

json chi_json(const ChiSquareResult& c) {
    return {{"statistic", c.statistic}, {"dof", c.dof}, {"p_value", c.p_value}};
}

CommandResult jumps(const Invocation& inv, std::ostream& log) {
    Reader r(inv.config, "");
    check_version(r);
    const SystemConfig sc = read_system(r);
    const InitialConfig init = read_initial(r);
    const double t_rep = r.number("t_rep");
    const std::uint64_t n_meas = r.count("measurements");
    const std::uint64_t seed = pick_seed(inv, r);
    JumpOptions opts;
    opts.assignment_error = r.number("assignment_error", 0.0);
    const auto bins = r.count("bins_per_decade", 5);
    r.finish();
    if (!(t_rep > 0.0)) throw ConfigError("t_rep: must be positive");
    if (n_meas < 1) throw ConfigError("measurements: must be at least 1");
    if (bins < 1) throw ConfigError("bins_per_decade: must be at least 1");
    opts.p_q_init = init.p_q;

    const ArrowheadSystem sys = sc.build();
    const auto p_t0 = init.tls_populations(sys, sc.p_th);
    const JumpTrace trace = simulate(sys, p_t0, t_rep, n_meas, seed, opts);

    Table tt{{"index", "time", "outcome", "p_q_pre", "tls_excess"}, {}};
    tt.rows.reserve(trace.outcomes.size());
    for (std::size_t i = 0; i < trace.outcomes.size(); ++i) {
        tt.add({static_cast<double>(i), trace.times[i], static_cast<double>(trace.outcomes[i]), trace.p_q_pre[i],
                trace.tls_excess[i]});
    }
    CommandResult res;
    res.files.push_back(write_table(inv.out, "trace", tt, inv.format));

    const auto hist = dwell_histogram(trace.outcomes, static_cast<int>(bins));
    res.files.push_back(write_table(inv.out, "dwell_e", histogram_table(hist.excited), inv.format));
    res.files.push_back(write_table(inv.out, "dwell_g", histogram_table(hist.ground), inv.format));

    const auto dwells = dwell_lengths(trace.outcomes);
    const GeometricLaw fit = fit_geometric(dwells);
    const auto ss = sys.steady_state();
    const TransitionRates eq = transition_rates(sys, std::span<const double>(ss).subspan(1));
    const GeometricLaw markov = poisson_reference(eq.up, eq.down, t_rep);
    json summary;
    summary["fitted"] = {{"stay_e", fit.stay_e}, {"stay_g", fit.stay_g}};
    summary["equilibrium_reference"] = {{"stay_e", markov.stay_e}, {"stay_g", markov.stay_g}};
    json tails = json::array();
    for (const auto& b : tail_excess(dwells, 1, fit.stay_e)) {
        tails.push_back({{"bin_lo", b.lo}, {"bin_hi", b.hi}, {"observed", b.observed}, {"expected", b.expected},
                         {"sigma", b.sigma}, {"z", b.z}});
    }
    summary["excited_tail_vs_fit"] = std::move(tails);
    for (std::uint8_t s : {std::uint8_t{1}, std::uint8_t{0}}) {
        const std::string key = s ? "chi_square_e" : "chi_square_g";
        try {
            summary[key] = {{"vs_fit", chi_json(geometric_chi_square(dwells, s, fit.stay(s)))},
                            {"vs_equilibrium", chi_json(geometric_chi_square(dwells, s, markov.stay(s)))}};
        } catch (const Error& e) {
            summary[key] = {{"error", e.what()}};
        }
    }
    write_json(inv.out / "summary.json", summary);
    res.files.push_back("summary.json");
    log << "jumps: " << n_meas << " measurements, " << dwells.size() << " dwells\n";

    res.effective_config = with_seed(inv.config, seed);
    res.rng = {{"id", rng_id}, {"seed", seed}};
    return res;
}

// gamma-map -----------------------------------------------------------------

CommandResult gamma_map(const Invocation& inv, std::ostream& log) {
    Reader r(inv.config, "");
    check_version(r);
    if (!r.has("gamma_tlss") && !r.has("validity")) {
        throw ConfigError("config: give gamma_tlss, validity or both");
    }
    CommandResult res;
    if (r.has("gamma_tlss")) {
        Reader c = r.object("gamma_tlss");
        const double g = c.number("g");
        const auto spacings = number_array(c.raw("spacings"), c.path("spacings"));
        const double offset = c.number("offset", 0.0);
        const auto gamma2 = grid(c.raw("gamma2"), c.path("gamma2"));
        c.finish();
        if (!(g > 0.0)) throw ConfigError("gamma_tlss.g: must be positive");
        for (double s : spacings) {
            if (!(s > 0.0)) throw ConfigError("gamma_tlss.spacings: must be positive");
        }
        for (double x : gamma2) {
            if (!(x > 0.0)) throw ConfigError("gamma_tlss.gamma2: must be positive");
        }
        // TLS ladder δ_h = hΔ + Δ₀ in the Lorentzian-ladder form a b²/(b² + (h − bc)²).
        Table t{{"gamma2", "spacing", "gamma_tlss", "plateau", "coherent"}, {}};
        for (double spacing : spacings) {
            for (double g2 : gamma2) {
                const double a = 2.0 * g * g / g2, b = g2 / spacing, c = -offset / g2;
                const bool coherent = 4.0 * g > std::hypot(g2, offset);
                t.add({g2, spacing, gamma_tlss_lorentzian(a, b, c), 2.0 * M_PI * g * g / spacing,
                       coherent ? 1.0 : 0.0});
            }
        }
        res.files.push_back(write_table(inv.out, "gamma_tlss", t, inv.format));
    }
    if (r.has("validity")) {
        Reader c = r.object("validity");
        const double g = c.number("g");
        const auto gamma2 = grid(c.raw("gamma2"), c.path("gamma2"));
        const auto delta = grid(c.raw("delta"), c.path("delta"));
        c.finish();
        if (!(g > 0.0)) throw ConfigError("validity.g: must be positive");
        for (double x : gamma2) {
            if (!(x > 0.0)) throw ConfigError("validity.gamma2: must be positive");
        }
        const ValidityMap map = validity_map(g, gamma2, delta);
        Table t{{"gamma2", "delta", "epsilon", "root_error", "d_sign"}, {}};
        for (const auto& cell : map.cells) {
            t.add({cell.gamma2, cell.delta, cell.epsilon, cell.root_error, static_cast<double>(cell.d_sign)});
        }
        res.files.push_back(write_table(inv.out, "validity", t, inv.format));
        Table contour{{"gamma2", "delta"}, {}};
        for (const auto& p : map.contour) contour.add({p[0], p[1]});
        res.files.push_back(write_table(inv.out, "contour", contour, inv.format));
        log << "validity map: " << map.cells.size() << " cells, " << map.contour.size() << " contour points\n";
    }
    r.finish();
    res.effective_config = inv.config;
    return res;
}

// pick ----------------------------------------------------------------------

CommandResult pick(const Invocation& inv, std::ostream& log) {
    Reader r(inv.config, "");
    check_version(r);
    const SystemConfig sc = read_system(r);
    std::vector<double> lambda;
    if (r.has("lambda")) lambda = grid(r.raw("lambda"), "lambda");
    r.finish();

    const ArrowheadSystem sys = sc.build();
    const SpectralDecomposition spec = eigen_decompose(sys);
    const auto* pl = sc.power_law();

    Table roots{{"m", "lambda", "norm_sq", "weight"}, {}};
    if (pl) {
        for (const char* c : {"z", "z_approx", "deviation"}) roots.columns.push_back(c);
    }
    for (std::size_t m = 0; m < spec.reduced_size(); ++m) {
        const double l = spec.eigenvalues()[m];
        std::vector<double> row{static_cast<double>(m), l, spec.norms()[m], 1.0 / spec.norms()[m]};
        if (pl) {
            const double gamma = (sc.gamma_q - sc.gamma_t) / pl->a;
            if (l > sc.gamma_t) {
                const double z = pl->a / (l - sc.gamma_t);
                const auto mm = static_cast<std::size_t>(std::floor(std::pow(z, 1.0 / pl->d)));
                row.insert(row.end(), {z, approx_roots(mm, gamma, pl->d), root_deviation(z, pl->d, mm)});
            } else {
                row.insert(row.end(), {nan, nan, nan});
            }
        }
        roots.add(std::move(row));
    }
    CommandResult res;
    res.files.push_back(write_table(inv.out, "roots", roots, inv.format));

    Table dec{{"rate", "multiplicity"}, {}};
    for (const auto& d : spec.decoupled()) dec.add({d.rate, static_cast<double>(d.multiplicity)});
    res.files.push_back(write_table(inv.out, "decoupled", dec, inv.format));

    if (!lambda.empty()) {
        Table f{{"lambda", "f"}, {}};
        for (double l : lambda) {
            try {
                f.add({l, pick_function(l, sys)});
            } catch (const PoleError&) {
                f.add({l, nan});
            }
        }
        res.files.push_back(write_table(inv.out, "pick", f, inv.format));
    }
    log << "pick: " << spec.reduced_size() << " secular roots\n";
    res.effective_config = inv.config;
    return res;
}

// polarize ------------------------------------------------------------------

CommandResult polarize(const Invocation& inv, std::ostream& log) {
    Reader r(inv.config, "");
    check_version(r);
    const SystemConfig sc = read_system(r);
    const auto pol = read_polarization(r, true);
    r.finish();
    if (!pol) throw ConfigError("polarization: required field missing");

    const ArrowheadSystem sys = sc.build();
    Table t{{"repetitions", "tls", "rate", "p_t"}, {}};
    for (std::size_t reps : pol->repetitions) {
        const auto p = hyperpolarize(sys, pol->target, reps, pol->t_rep);
        for (std::size_t k = 0; k < p.size(); ++k) {
            t.add({static_cast<double>(reps), static_cast<double>(k + 1), sys.rates()[k], p[k]});
        }
    }
    CommandResult res;
    res.files.push_back(write_table(inv.out, "polarization", t, inv.format));
    log << "polarize: " << pol->repetitions.size() << " repetition counts\n";
    res.effective_config = inv.config;
    return res;
}

// validate ------------------------------------------------------------------

SpinBathModel default_model() {
    SpinBathModel m;
    m.omega_q = 1.0;
    m.p_th = 0.1;
    m.gamma_q_down = 9e-5;
    m.gamma_q_up = 1e-5;
    m.gamma_q_phi = 0.01;
    m.tls.push_back({1.003, 0.002, 2e-5, 1.8e-4, 0.03});
    m.tls.push_back({0.998, 0.0015, 1e-5, 9e-5, 0.02});
    return m;
}

SpinBathModel read_model(Reader& parent) {
    Reader r = parent.object("model");
    SpinBathModel m;
    m.omega_q = r.number("omega_q");
    m.p_th = r.number("p_th");
    m.gamma_q_up = r.number("gamma_q_up", 0.0);
    m.gamma_q_down = r.number("gamma_q_down", 0.0);
    m.gamma_q_phi = r.number("gamma_q_phi", 0.0);
    const json& tls = r.raw("tls");
    if (!tls.is_array()) throw ConfigError("model.tls: expected an array");
    for (std::size_t k = 0; k < tls.size(); ++k) {
        Reader t(tls[k], "model.tls[" + std::to_string(k) + "]");
        TlsParams p;
        p.omega = t.number("omega");
        p.g = t.number("g");
        p.gamma_up = t.number("gamma_up", 0.0);
        p.gamma_down = t.number("gamma_down", 0.0);
        p.gamma_phi = t.number("gamma_phi", 0.0);
        t.finish();
        m.tls.push_back(p);
    }
    r.finish();
    try {
        m.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    return m;
}

struct Check {
    std::string name;
    double error = 0.0;
    double tolerance = 0.0;
    bool passed() const { return error <= tolerance; }
};

// Exact Lindblad populations vs the projected Solomon solution, relative,
// once the coherences have settled (t > 3/Γ₂).
Check lindblad_vs_solomon(const SpinBathModel& m, double tol) {
    const std::size_t n = m.tls_count();
    if (n > max_exact_tls) {
        throw SizeError("model has " + std::to_string(n) + " TLSs; the exact check supports at most " +
                        std::to_string(max_exact_tls));
    }
    const ArrowheadSystem sys = project_solomon(m);
    const double slowest = eigen_decompose(sys).all_eigenvalues().back();
    double gamma2 = std::numeric_limits<double>::infinity();
    for (const auto& t : m.tls) gamma2 = std::min(gamma2, m.qubit_gamma2() + t.gamma2());
    if (n == 0) gamma2 = m.qubit_gamma2() > 0.0 ? m.qubit_gamma2() : 1.0;
    const double t_end = 20.0 / slowest, t_min = 3.0 / gamma2;
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(t_min + (t_end - t_min) * i / 40.0);

    std::vector<double> p0(n + 1, m.p_th);
    p0[0] = 1.0;
    const auto rho = evolve_exact(m, product_state(p0), times);
    const Trajectory tr = solve(sys, p0, times);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto pe = populations(rho[i]);
        err = std::max(err, std::abs(tr.p_q[i] - pe[0]) / pe[0]);
        for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(tr.p_t[k][i] - pe[k + 1]) / pe[k + 1]);
    }
    return {"lindblad_vs_solomon", err, tol};
}

Check spectral_vs_expm(const ArrowheadSystem& sys, const std::string& name) {
    const std::size_t d = sys.size();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(d + 1, d + 1);
    aug.topLeftCorner(d, d) = -sys.dense_generator();
    for (std::size_t i = 0; i < d; ++i) aug(i, d) = sys.drive()[i];
    std::vector<double> p0(d);
    for (std::size_t i = 0; i < d; ++i) p0[i] = i % 2 ? 0.9 : 0.05;
    const std::vector<double> times{0.5, 5.0, 50.0, 500.0};
    const Trajectory tr = solve(sys, p0, times);
    Eigen::VectorXd x0(d + 1);
    for (std::size_t i = 0; i < d; ++i) x0[i] = p0[i];
    x0[d] = 1.0;
    double err = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
        const Eigen::VectorXd x = (aug * times[j]).exp() * x0;
        err = std::max(err, std::abs(x[0] - tr.p_q[j]));
        for (std::size_t k = 0; k + 1 < d; ++k) err = std::max(err, std::abs(x[k + 1] - tr.p_t[k][j]));
    }
    return {name, err, 1e-8};
}

std::vector<Check> spectral_checks(const ArrowheadSystem& sys) {
    const auto spec = eigen_decompose(sys);
    std::vector<double> poles;
    for (std::size_t k = 0; k < sys.tls_count(); ++k) poles.push_back(sys.tls_diagonal(k));
    std::sort(poles.begin(), poles.end(), std::greater<>());
    const auto lam = spec.all_eigenvalues();
    double violation = 0.0;
    for (std::size_t m = 1; m < lam.size(); ++m) {
        violation = std::max(violation, lam[m] - poles[m - 1]);
        if (m < poles.size()) violation = std::max(violation, poles[m] - lam[m]);
    }
    violation = std::max(violation, poles.empty() ? 0.0 : poles[0] - lam[0]);
    double w = 0.0;
    for (double nv : spec.norms()) w += 1.0 / nv;
    return {{"interlacing", std::max(0.0, violation / lam.front()), 1e-12},
            {"weight_completeness", std::abs(w - 1.0), 1e-10}};
}

// Σ_h a b²/(b² + (h − bc)²) over |h| ≤ 10⁵ plus the arctan tails.
double lorentzian_direct(double a, double b, double c) {
    const long n = 100000;
    double s = 0.0;
    for (long h = n; h >= -n; --h) {
        const double x = static_cast<double>(h) - b * c;
        s += a * b * b / (b * b + x * x);
    }
    const double nh = n + 0.5;
    s += a * b * (M_PI - std::atan((nh - b * c) / b) - std::atan((nh + b * c) / b));
    return s;
}

CommandResult validate(const Invocation& inv, std::ostream& log) {
    Reader r(inv.config, "");
    check_version(r);
    const SpinBathModel model = r.has("model") ? read_model(r) : default_model();
    const double tol = r.number("tolerance", 0.05);
    const std::uint64_t seed = pick_seed(inv, r);
    r.finish();
    if (!(tol > 0.0)) throw ConfigError("tolerance: must be positive");

    std::vector<Check> checks;
    checks.push_back(lindblad_vs_solomon(model, tol));
    checks.push_back(spectral_vs_expm(project_solomon(model), "projected_spectral_vs_expm"));

    const auto pl = ArrowheadSystem::thermal(0.05, 1e-3, build_power_law_rates(1.0, 2.0, 60).rates, 0.12);
    checks.push_back(spectral_vs_expm(pl, "power_law_spectral_vs_expm"));
    for (auto& c : spectral_checks(pl)) checks.push_back(c);

    double lor = 0.0;
    for (double b : {0.05, 0.5, 5.0}) {
        for (double c : {0.0, 0.25, 0.5}) {
            lor = std::max(lor, std::abs(gamma_tlss_lorentzian(1.0, b, c) / lorentzian_direct(1.0, b, c) - 1.0));
        }
    }
    checks.push_back({"lorentzian_closed_form", lor, 1e-8});

    const auto rates = build_power_law_rates(1.0, 2.0, 100000);
    const double partial = std::accumulate(rates.rates.rbegin(), rates.rates.rend(), 0.0);
    checks.push_back({"power_law_total", std::abs(partial + 1.0 / 100000.5 - M_PI * M_PI / 6.0), 1e-10});

    Rng rng(seed);
    double ident = 0.0, cubic = 0.0;
    const std::vector<double> times{0.0, 0.5, 5.0, 50.0};
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 30);
        const double g = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e3));
        const double gq = rng.uniform(), gt = 0.1 * rng.uniform(), p_th = rng.uniform();
        const double pq0 = rng.uniform(), pt0 = rng.uniform();
        const auto cf = identical_rates_solution(n, g, gq, gt, p_th, pq0, pt0, times);
        std::vector<double> p0(n + 1, pt0);
        p0[0] = pq0;
        const auto ex = solve(ArrowheadSystem::thermal(gq, gt, std::vector<double>(n, g), p_th), p0, times);
        for (std::size_t j = 0; j < times.size(); ++j) {
            ident = std::max({ident, std::abs(cf.p_q[j] - ex.p_q[j]), std::abs(cf.p_t[j] - ex.p_t[0][j])});
        }
    }
    for (int i = 0; i < 1000; ++i) {
        const ManifoldParams p{std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4)), 20.0 * rng.uniform() - 10.0,
                               std::exp(std::log(1e-2) + rng.uniform() * std::log(1e3))};
        const auto c = cubic_roots(p);
        const double q = 4.0 * p.g * p.g / (p.gamma2 * p.gamma2);
        cubic = std::max({cubic, std::abs(c.mu[0] + c.mu[1] + c.mu[2] - 2.0),
                          std::abs(c.mu[0] * c.mu[1] * c.mu[2] - q) / std::max(1.0, q)});
    }
    checks.push_back({"identical_rates_closed_form", ident, 1e-10});
    checks.push_back({"cubic_root_rules", cubic, 1e-12});

    json report;
    report["checks"] = json::array();
    bool all = true;
    for (const auto& c : checks) {
        report["checks"].push_back(
            {{"name", c.name}, {"passed", c.passed()}, {"error", c.error}, {"tolerance", c.tolerance}});
        all = all && c.passed();
        log << (c.passed() ? "PASS " : "FAIL ") << c.name << " error=" << c.error << " tol=" << c.tolerance
            << '\n';
    }
    report["warnings"] = json::array();
    for (const auto& w : coherent_regime_check(model)) {
        report["warnings"].push_back({{"tls", w.tls + 1}, {"g", w.g}, {"gamma2", w.gamma2}, {"delta", w.delta},
                                      {"message", "4g exceeds sqrt(gamma2^2 + delta^2): coherent exchange"}});
        log << "warning: TLS " << w.tls + 1 << " is in the coherent regime\n";
    }
    report["passed"] = all;

    CommandResult res;
    write_json(inv.out / "report.json", report);
    res.files.push_back("report.json");
    res.status = all ? exit_ok : exit_validation;
    res.effective_config = with_seed(inv.config, seed);
    res.rng = {{"id", rng_id}, {"seed", seed}};
    return res;
}

} // namespace

CommandResult execute(const Invocation& inv, std::ostream& log) {
    if (inv.command == "relax") return relax(inv, log);
    if (inv.command == "jumps") return jumps(inv, log);
    if (inv.command == "gamma-map") return gamma_map(inv, log);
    if (inv.command == "pick") return pick(inv, log);
    if (inv.command == "polarize") return polarize(inv, log);
    if (inv.command == "validate") return validate(inv, log);
    throw ConfigError("unknown command: " + inv.command);
}

} // namespace spinbath::cli
