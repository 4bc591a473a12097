// output.hpp: plot-ready tables written as CSV (17 significant digits, LF)
// or JSON, plus pretty-printed JSON documents.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace spinbath::cli {

enum class Format { csv, json };

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

std::string format_number(double x);

// Writes <dir>/<stem>.csv or <dir>/<stem>.json; returns the file name.
std::string write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t,
                        Format format);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);

} // namespace spinbath::cli
