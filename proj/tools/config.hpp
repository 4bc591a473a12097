// config.hpp: JSON run configuration: typed records and a strict reader that
// rejects unknown keys and reports the offending field path.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spinbath/arrowhead.hpp"
#include "spinbath/model.hpp"

namespace spinbath::cli {

using nlohmann::json;

inline constexpr int schema_version = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parses text, mapping parse errors to "line L, column C" diagnostics.
json parse_config_text(const std::string& text);

// Walks one JSON object; every key must be read before finish().
class Reader {
public:
    Reader(const json& j, std::string path);

    bool has(const std::string& key) const;
    const json& raw(const std::string& key);
    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    std::uint64_t count(const std::string& key);
    std::uint64_t count(const std::string& key, std::uint64_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key, const std::vector<std::string>& allowed);
    std::string string(const std::string& key, const std::vector<std::string>& allowed,
                       const std::string& fallback);
    Reader object(const std::string& key);
    std::string path(const std::string& key) const;
    void finish() const;

private:
    const json& j_;
    std::string path_;
    std::vector<std::string> seen_;
};

double as_number(const json& v, const std::string& path);
std::vector<double> number_array(const json& v, const std::string& path);
// Either an explicit array or {start, stop, points, spacing: log|linear}.
std::vector<double> grid(const json& v, const std::string& path);

struct SystemConfig {
    double gamma_q = 0.0;
    double gamma_t = 0.0;
    double p_th = 0.0;
    RateDistribution rates;

    ArrowheadSystem build() const;
    const PowerLawDistribution* power_law() const { return std::get_if<PowerLawDistribution>(&rates.kind); }
};

SystemConfig read_system(Reader& parent);

struct PolarizationConfig {
    PolarizationTarget target = PolarizationTarget::excited;
    std::vector<std::size_t> repetitions;
    double t_rep = 0.0;
};

std::optional<PolarizationConfig> read_polarization(Reader& parent, bool allow_list);

// Initial TLS populations: explicit values (scalar or per TLS) or polarization.
struct InitialConfig {
    std::optional<double> p_q;
    std::optional<json> p_t;
    std::optional<PolarizationConfig> polarization;

    std::vector<double> tls_populations(const ArrowheadSystem& sys, double p_th) const;
};

InitialConfig read_initial(Reader& parent);

} // namespace spinbath::cli
