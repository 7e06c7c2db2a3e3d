#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "ncdecay/harness.hpp"

using namespace ncdecay;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, failed = 1, usage = 2, numerical = 3 };

harness::ExperimentConfig load(const std::string& path, std::optional<std::size_t> threads,
                               std::optional<std::uint64_t> seed) {
    auto c = harness::load_config(path, harness::process_environment());
    if (threads) c.threads = *threads;
    if (seed) c.seed = *seed;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decay experiments for the heat equation on a growing interval"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
    std::optional<std::uint64_t> seed;
    app.add_option("--out", out, "run directory (default: output.directory/<command>-<hash>)");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "root seed");

    std::string config;
    auto* solve = app.add_subcommand("solve", "solve one configuration and check bounds");
    auto* sweep = app.add_subcommand("sweep", "classify decay over the (alpha, gamma) sweep lists");
    auto* eigen = app.add_subcommand("eigen", "eigenpairs of the configured eigenproblem");
    auto* bounds = app.add_subcommand("bounds", "tabulate the configured bounds without solving");
    for (auto* s : {solve, sweep, eigen, bounds})
        s->add_option("config", config, "TOML configuration file")->required();
    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "run property suites");
    verify->add_option("suite", suite, "suite name or 'all'");
    std::string run_dir;
    auto* rep = app.add_subcommand("report", "summarise a run directory");
    rep->add_option("run-dir", run_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const std::optional<fs::path> out_path = out ? std::optional<fs::path>(*out) : std::nullopt;
        if (*solve) {
            const auto c = load(config, threads, seed);
            const auto dir = harness::run_directory(c, "solve", out_path);
            const auto r = harness::run_solve(c, dir);
            std::cout << harness::report(dir);
            bool good = r.errors.empty();
            for (const auto& b : r.bounds) good = good && b.ok();
            return good ? ok : failed;
        }
        if (*sweep) {
            const auto c = load(config, threads, seed);
            const auto dir = harness::run_directory(c, "sweep", out_path);
            const auto s = harness::run_sweep(c, dir);
            std::cout << harness::report(dir);
            return s.passed ? ok : failed;
        }
        if (*eigen) {
            const auto c = load(config, threads, seed);
            const auto dir = harness::run_directory(c, "eigen", out_path);
            harness::run_eigen(c, dir);
            std::cout << harness::report(dir);
            return ok;
        }
        if (*bounds) {
            const auto c = load(config, threads, seed);
            const auto dir = harness::run_directory(c, "bounds", out_path);
            const auto specs = harness::run_bounds(c, dir);
            std::cout << "wrote " << specs.size() << " bound tables to " << dir.string() << "\n";
            return ok;
        }
        if (*verify) {
            const harness::ExperimentConfig defaults;
            const auto results = harness::run_verify(suite, seed.value_or(defaults.seed), threads.value_or(1));
            bool all = true;
            for (const auto& r : results) {
                std::printf("%-20s %s  %zu trials, %zu failures  %s\n", r.name.c_str(),
                            r.passed() ? "PASS" : "FAIL", r.trials, r.failures, r.detail.c_str());
                std::fflush(stdout);
                all = all && r.passed();
            }
            return all ? ok : failed;
        }
        if (*rep) {
            std::cout << harness::report(run_dir);
            return harness::missing_artifacts(run_dir).empty() ? ok : failed;
        }
    } catch (const harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return usage;
    } catch (const harness::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return usage;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numerical;
    }
    return usage;
}
