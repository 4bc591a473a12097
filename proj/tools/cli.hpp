// cli.hpp: `spinbath <command> --config file.json --out dir [--seed N] [--format csv|json]`
//
// Exit codes: 0 success, 1 validation failure, 2 config error.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "output.hpp"

namespace spinbath::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_config = 2;

const char* tool_version();

struct Invocation {
    std::string command;
    nlohmann::json config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    Format format = Format::csv;
};

struct CommandResult {
    int status = exit_ok;
    std::vector<std::string> files;
    nlohmann::json effective_config;   // recorded in metadata
    nlohmann::json rng;                // null unless the command draws random numbers
};

// Runs one command; throws ConfigError or spinbath::Error on bad input.
CommandResult execute(const Invocation& inv, std::ostream& log);

// Full front end: argument parsing, config loading, metadata, exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace spinbath::cli
