#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace spinbath::cli {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_binary(const std::filesystem::path& file) {
    std::ofstream f(file, std::ios::binary);   // binary: LF on every platform
    if (!f) throw std::runtime_error("cannot write " + file.string());
    return f;
}

} // namespace

std::string write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t,
                        Format format) {
    if (format == Format::json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : t.rows) {
            nlohmann::json row = nlohmann::json::array();
            for (double x : r) {
                if (std::isfinite(x)) {
                    row.push_back(x);
                } else {
                    row.push_back(nullptr);
                }
            }
            rows.push_back(std::move(row));
        }
        const std::string name = stem + ".json";
        write_json(dir / name, {{"columns", t.columns}, {"rows", std::move(rows)}});
        return name;
    }
    const std::string name = stem + ".csv";
    auto f = open_binary(dir / name);
    for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << t.columns[i];
    f << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << format_number(r[i]);
        f << '\n';
    }
    return name;
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
    auto f = open_binary(file);
    f << j.dump(2) << '\n';
}

} // namespace spinbath::cli
