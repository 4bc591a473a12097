#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spinbath::cli {

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": " + msg);
}

} // namespace

json parse_config_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << "JSON syntax error at line " << line << ", column " << col;
        throw ConfigError(msg.str());
    }
}

Reader::Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
}

bool Reader::has(const std::string& key) const { return j_.contains(key); }

std::string Reader::path(const std::string& key) const { return join(path_, key); }

const json& Reader::raw(const std::string& key) {
    if (!j_.contains(key)) fail(path(key), "required field missing");
    seen_.push_back(key);
    return j_.at(key);
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

double Reader::number(const std::string& key) { return as_number(raw(key), path(key)); }

double Reader::number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
}

std::uint64_t Reader::count(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        fail(path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::uint64_t Reader::count(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : fallback;
}

bool Reader::boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
}

std::string Reader::string(const std::string& key, const std::vector<std::string>& allowed) {
    const json& v = raw(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    const auto s = v.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(path(key), "must be one of: " + list);
    }
    return s;
}

std::string Reader::string(const std::string& key, const std::vector<std::string>& allowed,
                           const std::string& fallback) {
    return has(key) ? string(key, allowed) : fallback;
}

Reader Reader::object(const std::string& key) { return Reader(raw(key), path(key)); }

void Reader::finish() const {
    for (const auto& [key, value] : j_.items()) {
        if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) fail(join(path_, key), "unknown key");
    }
}

std::vector<double> number_array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> grid(const json& v, const std::string& path) {
    if (v.is_array()) {
        auto out = number_array(v, path);
        if (out.empty()) fail(path, "grid must not be empty");
        return out;
    }
    Reader r(v, path);
    const double start = r.number("start"), stop = r.number("stop");
    const auto points = r.count("points");
    const auto spacing = r.string("spacing", {"linear", "log"}, "linear");
    r.finish();
    if (points < 1) fail(r.path("points"), "must be at least 1");
    if (spacing == "log" && !(start > 0.0 && stop > 0.0)) fail(path, "log grid needs positive bounds");
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double f = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        out[i] = spacing == "log" ? start * std::pow(stop / start, f) : start + (stop - start) * f;
    }
    out.back() = points == 1 ? start : stop;
    return out;
}

ArrowheadSystem SystemConfig::build() const {
    auto r = rates.rates();
    // Explicit rates keep the caller's order so per-TLS populations line up.
    if (const auto* e = std::get_if<ExplicitRates>(&rates.kind)) r = e->rates;
    return ArrowheadSystem::thermal(gamma_q, gamma_t, std::move(r), p_th);
}

SystemConfig read_system(Reader& parent) {
    Reader r = parent.object("system");
    SystemConfig s;
    s.gamma_q = r.number("gamma_q");
    s.gamma_t = r.number("gamma_t", 0.0);
    s.p_th = r.number("p_th");
    if (s.gamma_q < 0.0) fail(r.path("gamma_q"), "must be non-negative");
    if (s.gamma_t < 0.0) fail(r.path("gamma_t"), "must be non-negative");
    if (!(s.p_th >= 0.0 && s.p_th <= 1.0)) fail(r.path("p_th"), "must lie in [0, 1]");

    Reader rates = r.object("rates");
    int kinds = 0;
    if (rates.has("power_law")) {
        ++kinds;
        Reader p = rates.object("power_law");
        PowerLawDistribution d;
        d.a = p.number("a");
        d.d = p.number("d");
        d.n = p.count("n");
        p.finish();
        if (!(d.a > 0.0)) fail(p.path("a"), "must be positive");
        if (!(d.d > 1.0)) fail(p.path("d"), "must exceed 1");
        s.rates.kind = d;
    }
    if (rates.has("explicit")) {
        ++kinds;
        const std::string path = rates.path("explicit");
        auto v = number_array(rates.raw("explicit"), path);
        for (double x : v) {
            if (!(x > 0.0)) fail(path, "rates must be positive");
        }
        s.rates.kind = ExplicitRates{std::move(v)};
    }
    if (rates.has("lorentzian_ladder")) {
        ++kinds;
        Reader p = rates.object("lorentzian_ladder");
        LorentzianLadderDistribution d;
        d.a = p.number("a");
        d.b = p.number("b");
        d.c = p.number("c", 0.0);
        d.n = p.count("n");
        p.finish();
        if (!(d.a > 0.0)) fail(p.path("a"), "must be positive");
        if (!(d.b > 0.0)) fail(p.path("b"), "must be positive");
        s.rates.kind = d;
    }
    rates.finish();
    if (kinds != 1) fail(r.path("rates"), "give exactly one of power_law, explicit, lorentzian_ladder");
    r.finish();
    return s;
}

std::optional<PolarizationConfig> read_polarization(Reader& parent, bool allow_list) {
    if (!parent.has("polarization")) return std::nullopt;
    Reader r = parent.object("polarization");
    PolarizationConfig p;
    p.target = r.string("target", {"excited", "ground"}, "excited") == "excited" ? PolarizationTarget::excited
                                                                               : PolarizationTarget::ground;
    const std::string rp = r.path("repetitions");
    const json& reps = r.raw("repetitions");
    auto one = [&](const json& v, const std::string& path) {
        if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
        p.repetitions.push_back(v.get<std::size_t>());
    };
    if (reps.is_array()) {
        if (!allow_list) fail(rp, "expected a single integer");
        if (reps.empty()) fail(rp, "must not be empty");
        for (std::size_t i = 0; i < reps.size(); ++i) one(reps[i], rp + "[" + std::to_string(i) + "]");
    } else {
        one(reps, rp);
    }
    p.t_rep = r.number("t_rep");
    if (!(p.t_rep > 0.0)) fail(r.path("t_rep"), "must be positive");
    r.finish();
    return p;
}

InitialConfig read_initial(Reader& parent) {
    InitialConfig c;
    if (parent.has("initial")) {
        Reader r = parent.object("initial");
        if (r.has("p_q")) {
            c.p_q = r.number("p_q");
            if (!(*c.p_q >= 0.0 && *c.p_q <= 1.0)) fail(r.path("p_q"), "must lie in [0, 1]");
        }
        if (r.has("p_t")) c.p_t = r.raw("p_t");
        r.finish();
    }
    c.polarization = read_polarization(parent, false);
    if (c.p_t && c.polarization) fail(parent.path("polarization"), "conflicts with initial.p_t");
    return c;
}

std::vector<double> InitialConfig::tls_populations(const ArrowheadSystem& sys, double p_th) const {
    const std::size_t n = sys.tls_count();
    if (polarization) {
        return hyperpolarize(sys, polarization->target, polarization->repetitions.front(), polarization->t_rep);
    }
    std::vector<double> out(n, p_th);
    if (p_t) {
        const std::string path = "initial.p_t";
        if (p_t->is_array()) {
            out = number_array(*p_t, path);
            if (out.size() != n) fail(path, "expected " + std::to_string(n) + " entries");
        } else {
            std::fill(out.begin(), out.end(), as_number(*p_t, path));
        }
        for (double x : out) {
            if (!(x >= 0.0 && x <= 1.0)) fail(path, "populations must lie in [0, 1]");
        }
    }
    return out;
}

} // namespace spinbath::cli
