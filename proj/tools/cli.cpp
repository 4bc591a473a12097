#include "cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "spinbath/errors.hpp"

#ifndef SPINBATH_VERSION
#define SPINBATH_VERSION "0.0.0"
#endif

namespace spinbath::cli {

const char* tool_version() { return SPINBATH_VERSION; }

namespace {

const std::vector<std::string> commands{"relax", "jumps", "gamma-map", "pick", "polarize", "validate"};

json load_config(const std::filesystem::path& file, const std::string& command) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json j = parse_config_text(buf.str());
    if (!j.is_object()) throw ConfigError("config: expected an object");

    // A metadata.json from an earlier run replays its effective config.
    if (j.contains("config") && j.contains("command") && j.contains("tool_version")) {
        if (!j["command"].is_string() || j["command"].get<std::string>() != command) {
            throw ConfigError("metadata was written by command '" + j["command"].dump() + "', not '" + command + "'");
        }
        json inner = j["config"];
        if (!inner.is_object()) throw ConfigError("metadata.config: expected an object");
        if (j.contains("schema_version")) inner["schema_version"] = j["schema_version"];
        return inner;
    }
    return j;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Qubit relaxation in a bath of two-level systems"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    std::string config_file, out_dir, format = "csv";
    std::optional<std::uint64_t> seed;
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_file, "JSON configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "RNG seed (overrides config)");
        sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
    }

    // CLI11 parses the reversed argument vector.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    Invocation inv;
    inv.command = app.get_subcommands().front()->get_name();
    inv.out = out_dir;
    inv.seed = seed;
    inv.format = format == "json" ? Format::json : Format::csv;

    try {
        inv.config = load_config(config_file, inv.command);
        std::filesystem::create_directories(inv.out);
        const CommandResult res = execute(inv, err);

        json meta;
        meta["schema_version"] = schema_version;
        meta["command"] = inv.command;
        json effective = res.effective_config;
        effective.erase("schema_version");
        meta["config"] = effective;
        meta["rng"] = res.rng;
        meta["tool_version"] = tool_version();
        meta["files"] = res.files;
        write_json(inv.out / "metadata.json", meta);

        for (const auto& f : res.files) out << (inv.out / f).string() << '\n';
        return res.status;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return exit_config;
}

} // namespace spinbath::cli
