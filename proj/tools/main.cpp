#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, usage = 1, bad_config = 2, failed = 3 };

int run(const std::string& config_path, const fs::path& out, const std::optional<std::uint64_t>& seed,
        unsigned threads, const std::optional<std::string>& experiment) {
    cli::Config cfg = config_path.empty() ? cli::default_config() : cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (experiment) cfg.experiments = cli::split_list(*experiment);
    bh_set_threads(threads);

    fs::create_directories(out);
    const auto written = cli::run_experiments(cfg, out);

    auto tree = cli::to_tree(cfg);
    tree.put("run.version", bh_version());
    std::string files;
    for (const auto& f : written) files += (files.empty() ? "" : " ") + f;
    tree.put("run.outputs", files);
    cli::write_ini(out / "manifest.ini", tree);
    for (const auto& f : written) std::cout << (out / f).string() << '\n';
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bermudan swaption regress-later pricing, bounds and hedging experiments"};
    std::string config_path;
    std::string out = "results";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::optional<std::string> experiment;
    app.add_option("--config", config_path, "experiment config (INI)")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "override the experiment seed");
    app.add_option("--threads", threads, "worker threads, 0 for all cores");
    app.add_option("--experiment", experiment, "price, bounds, benchmark, hedge or sweep (space or comma separated)");

    std::string report_dir;
    auto* rep = app.add_subcommand("report", "merge run directories into tables with SEs across runs");
    rep->add_option("dir", report_dir, "directory of runs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (*rep) {
            for (const auto& f : cli::report(report_dir)) std::cout << (fs::path(report_dir) / f).string() << '\n';
            return ok;
        }
        return run(config_path, out, seed, threads, experiment);
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return bad_config;
    } catch (const cli::RunError& e) {
        std::cerr << "error [" << e.module << "]: " << e.what() << '\n';
        return failed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failed;
    }
}
