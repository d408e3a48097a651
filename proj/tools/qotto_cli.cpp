// qotto: run quantum Otto cycle experiments and write CSV tables.

#include "qotto/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

namespace {

using Command = std::function<qotto::cli::CommandOutput(const qotto::cli::ExperimentConfig&,
                                                        const qotto::cli::RunOptions&)>;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : fallback;
}

bool env_flag(const char* name) {
    const char* v = std::getenv(name);
    if (!v) return false;
    const std::string s(v);
    return s == "1" || s == "true" || s == "yes" || s == "on";
}

void error_record(const std::string& command, const std::string& kind, const std::string& message,
                  const std::string& point = "") {
    nlohmann::json j{{"command", command}, {"error", kind}, {"message", message}};
    if (!point.empty()) j["point"] = point;
    std::cerr << j.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HEOM quantum Otto engine experiments"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path = env_or("QOTTO_CONFIG", "");
    std::string out_dir = env_or("QOTTO_OUT", ".");
    unsigned workers = 1;
    if (const char* w = std::getenv("QOTTO_WORKERS")) {
        try {
            workers = static_cast<unsigned>(std::stoul(w));
        } catch (...) {
            error_record("", "config", "QOTTO_WORKERS must be a positive integer");
            return 2;
        }
    }
    bool strict = env_flag("QOTTO_STRICT");

    app.add_option("-c,--config", config_path, "JSON experiment configuration (default: built-in defaults)");
    app.add_option("-o,--out", out_dir, "output directory");
    app.add_option("-w,--workers", workers, "worker threads for independent points")->check(CLI::Range(1u, 1024u));
    app.add_flag("--strict", strict, "stop at the first failed point with a JSON error record");

    const std::map<std::string, std::pair<const char*, Command>> commands{
        {"single-cycle", {"one cycle of the configured variant", qotto::cli::single_cycle}},
        {"sweep-coupling", {"equilibrating cycles over the coupling grid", qotto::cli::sweep_coupling_command}},
        {"sweep-stop-time", {"interrupted cycles over the stop-time grid", qotto::cli::sweep_stop_time_command}},
        {"sweep-frequency", {"interrupted cycles over omega_c and stop time", qotto::cli::sweep_frequency_command}},
        {"isochore-trace", {"population and interaction energy along both isochores",
                            qotto::cli::isochore_trace_command}},
        {"equilibration-scan", {"tau_eq and W_ext versus the fidelity tolerance",
                                qotto::cli::equilibration_scan_command}},
        {"bath-check", {"bath correlation expansion against quadrature", qotto::cli::bath_check_command}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();
    const Command& run = commands.at(name).second;

    qotto::cli::ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? qotto::cli::parse_config_text("{}") : qotto::cli::load_config(config_path);
    } catch (const std::exception& e) {
        error_record(name, "config", e.what());
        return 2;
    }

    try {
        std::filesystem::create_directories(out_dir);
        const qotto::cli::RunOptions opt{workers, strict};
        const auto out = run(cfg, opt);
        for (const auto& [file, table] : out.files) {
            const auto path = (std::filesystem::path(out_dir) / file).string();
            table.write_file(path);
            std::cout << "wrote " << path << " (" << table.rows() << " rows)\n";
        }
        for (const auto& note : out.notes) std::cout << note << '\n';
    } catch (const qotto::cli::PointFailure& e) {
        error_record(name, "point", e.what(), e.point());
        return 3;
    } catch (const qotto::cli::ConfigError& e) {
        error_record(name, "config", e.what());
        return 2;
    } catch (const std::exception& e) {
        error_record(name, "runtime", e.what());
        return 1;
    }
    return 0;
}
