#include "cli_app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "nlbox/errors.hpp"
#include "nlbox/report.hpp"
#include "nlbox/scenario.hpp"

namespace nlbox::cli {

namespace {

namespace fs = std::filesystem;

struct Flags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
    std::optional<std::string> out;
    std::optional<double> tol;
};

std::optional<fs::path> env_out_dir() {
    const char* dir = std::getenv("NLBOX_OUT_DIR");
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    return fs::path(dir);
}

OutputFormat pick_format(const Flags& flags, OutputFormat fallback) {
    return flags.format ? output_format_from_string(*flags.format) : fallback;
}

/// --out wins; otherwise the scenario's own path, placed under NLBOX_OUT_DIR
/// when that is set and the path is relative.
std::optional<fs::path> pick_destination(const Flags& flags, const std::optional<std::string>& configured) {
    if (flags.out) return fs::path(*flags.out);
    if (!configured) return std::nullopt;
    fs::path p(*configured);
    if (const auto dir = env_out_dir(); dir && p.is_relative()) p = *dir / p;
    return p;
}

void emit(const Report& report, OutputFormat format, const std::optional<fs::path>& dest, std::ostream& out) {
    if (dest) {
        write_report(report, format, *dest);
        out << "wrote " << dest->string() << '\n';
    } else {
        emit_table(report, format, out);
    }
}

ScenarioConfig load(const std::string& file, const Flags& flags, std::optional<Protocol> protocol) {
    ScenarioConfig config = parse_scenario(file);
    if (flags.seed) config.seed = *flags.seed;
    if (flags.tol) config.params.tol = *flags.tol;
    if (protocol) config.protocol = *protocol;
    return config;
}

int run_one(const std::string& file, const Flags& flags, std::optional<Protocol> protocol, std::ostream& out) {
    const ScenarioConfig config = load(file, flags, protocol);
    const Report report = run_scenario(config);
    emit(report, pick_format(flags, config.output_format), pick_destination(flags, config.output_path), out);
    return 0;
}

int run_batch(const std::string& dir, const Flags& flags, std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(dir)) throw IoError("batch: '" + dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".scn") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    const fs::path out_dir = flags.out ? fs::path(*flags.out) : env_out_dir().value_or(fs::path("."));

    struct Outcome {
        int code = 0;
        std::string message;
    };
    std::vector<Outcome> outcomes(files.size());
    const auto n = static_cast<std::int64_t>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        auto& o = outcomes[static_cast<std::size_t>(i)];
        const auto& file = files[static_cast<std::size_t>(i)];
        try {
            const ScenarioConfig config = load(file.string(), flags, std::nullopt);
            const OutputFormat format = pick_format(flags, config.output_format);
            const fs::path dest = out_dir / (file.stem().string() + "." + std::string(to_string(format)));
            write_report(run_scenario(config), format, dest);
            o.message = "ok " + file.filename().string() + " -> " + dest.string();
        } catch (const Error& e) {
            o.code = static_cast<int>(e.exit_code());
            o.message = e.what();
        } catch (const std::exception& e) {
            o.code = static_cast<int>(ExitCode::kFailure);
            o.message = e.what();
        }
    }
    int code = 0;
    for (const auto& o : outcomes) {
        if (o.code == 0) {
            out << o.message << '\n';
        } else {
            err << "nlbox: error: " << o.message << '\n';
            if (code == 0) code = o.code;
        }
    }
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulator for nonlinear boxes in operational quantum theory", "nlbox"};
    app.require_subcommand(1);
    Flags flags;
    std::string file;

    const auto add_common = [&flags](CLI::App* sub) {
        sub->add_option("--seed", flags.seed, "Override the scenario seed");
        sub->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", flags.out, "Output path (a directory for batch)");
        sub->add_option("--tol", flags.tol, "Tolerance override")->check(CLI::NonNegativeNumber);
    };

    std::optional<Protocol> protocol;
    std::string mode;
    const auto scenario_command = [&](const char* name, const char* help, std::optional<Protocol> p) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("file", file, "Scenario file")->required();
        add_common(sub);
        sub->callback([&, p, name] {
            mode = name;
            protocol = p;
        });
    };
    scenario_command("run", "Run a scenario with its own protocol", std::nullopt);
    scenario_command("verify", "Verify the box's transitions", Protocol::kVerify);
    scenario_command("signaling", "Run the remote-preparation signaling test", Protocol::kSignaling);
    scenario_command("bb84", "Run the BB84 interception", Protocol::kBb84);

    auto* witness = app.add_subcommand("witness", "Linearity witness of a statistics file");
    witness->add_option("stats-file", file, "Statistics table")->required();
    add_common(witness);
    witness->callback([&] { mode = "witness"; });

    auto* batch = app.add_subcommand("batch", "Run every .scn file in a directory");
    batch->add_option("dir", file, "Scenario directory")->required();
    add_common(batch);
    batch->callback([&] { mode = "batch"; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "nlbox: error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::kParse);
    }

    try {
        if (mode == "batch") return run_batch(file, flags, out, err);
        if (mode == "witness") {
            const Report report = run_witness_file(file, flags.tol);
            emit(report, pick_format(flags, OutputFormat::kJson), pick_destination(flags, std::nullopt), out);
            return 0;
        }
        return run_one(file, flags, protocol, out);
    } catch (const Error& e) {
        err << "nlbox: error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        err << "nlbox: error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::kFailure);
    }
}

}  // namespace nlbox::cli
