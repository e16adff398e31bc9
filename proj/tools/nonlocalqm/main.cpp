#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nonlocalqm/experiments.hpp"

namespace {

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = nonlocalqm::cli;
    CLI::App app{"Nonlocal quantum mechanics experiments"};
    std::string sub, config, outdir = "results";
    std::optional<std::uint64_t> seed;
    bool no_timestamp = false;
    app.add_option("subcommand", sub, "spectrum | evolve | bandlimit-audit | deconvolve | algebra-check | orbit | sweep")
        ->required()
        ->check(CLI::IsMember(cli::subcommands()));
    app.add_option("--config", config, "YAML experiment config")->required();
    app.add_option("--outdir", outdir, "output root (default: results)");
    app.add_option("--seed", seed, "overrides the config seed");
    app.add_flag("--no-timestamp", no_timestamp, "write to <outdir>/<experiment>/ without a timestamp directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const cli::Config cfg = cli::Config::load(config);
        const cli::Outputs out = cli::run_experiment(sub, cfg, seed);
        std::filesystem::path dir = std::filesystem::path(outdir) / out.summary["experiment"].get<std::string>();
        if (!no_timestamp) dir /= utc_stamp();
        cli::write_outputs(out, dir);
        for (const auto& w : out.summary["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
        const bool pass = out.summary["all_pass"].get<bool>();
        std::cout << dir.string() << "\n";
        std::cout << sub << ": " << (pass ? "all checks pass" : "some checks FAIL") << " ("
                  << out.summary["checks"].size() << " checks)\n";
        return 0;
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nonlocalqm::Error& e) {
        std::cerr << "error in " << e.operation() << ": " << e.what() << "\n";
        return e.kind() == nonlocalqm::ErrorKind::invalid_argument ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
