// blackstart: energize a grid-forming inverter's transformer with hard,
// ultra-fast or spiral soft magnetization and report the transients.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "blackstart/commands.hpp"
#include "blackstart/report.hpp"
#include "blackstart/scenario_file.hpp"

namespace {

using namespace blackstart;

ProfileKind profile_from_flag(const std::string& name) {
    if (name == "hard" || name == "ultrafast" || name == "spiral") {
        return parse_profile_kind(name);
    }
    throw UsageError("--profile must be hard, ultrafast or spiral");
}

int simulate(const std::string& scenario_path, const std::string& out, bool no_filter) {
    ScenarioFile file = load_scenario_file(scenario_path);
    if (no_filter) {
        file.scenario.filter.reset();
    }
    const SimResult r = simulate_to_directory(file, out);
    std::cout << "wrote " << out << " (" << r.series.size() << " samples, peak i_pcc "
              << r.metrics.peak_i_pcc_pu << " p.u.)\n";
    return kExitOk;
}

int compare(const std::string& out) {
    CompareOptions options;
    options.threads = thread_budget();
    const std::vector<CompareRow> rows = run_compare(options);
    write_comparison(out, rows, options);
    std::cout << format_comparison_summary(rows, options);
    for (const CompareRow& row : rows) {
        if (!row.ok()) {
            return kExitFailure;
        }
    }
    return kExitOk;
}

int sweep(const std::string& profile, std::size_t points, const std::string& out, bool no_filter,
          std::optional<std::uint64_t> seed) {
    SweepOptions options;
    options.profile = profile_from_flag(profile);
    options.points = points;
    options.filter = !no_filter;
    options.seed = seed;
    options.threads = thread_budget();
    const std::vector<SweepPoint> result = run_sweep(options);
    std::filesystem::create_directories(out);
    write_file_atomic(std::filesystem::path(out) / "sweep.csv", format_sweep_csv(result));
    std::cout << "wrote " << out << "/sweep.csv (" << result.size() << " points)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transformer energization transients for grid-forming black start"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out;
    bool no_filter = false;
    std::string profile;
    std::size_t points = 0;
    std::optional<std::uint64_t> seed;

    CLI::App* sim = app.add_subcommand("simulate", "Run one scenario file");
    sim->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sim->add_option("--out", out, "Output directory")->required();
    sim->add_flag("--no-filter", no_filter, "Drop the LC filter from the scenario");

    CLI::App* cmp = app.add_subcommand("compare", "Run the built-in method comparison matrix");
    cmp->add_option("--out", out, "Output directory")->required();

    CLI::App* swp = app.add_subcommand("sweep-residual", "Sweep residual flux magnitude");
    swp->add_option("--profile", profile, "hard, ultrafast or spiral")->required();
    swp->add_option("--points", points, "Number of residual magnitudes (>= 2)")->required();
    swp->add_option("--out", out, "Output directory")->required();
    swp->add_option("--seed", seed, "Draw the residual direction from this seed");
    swp->add_flag("--no-filter", no_filter, "Run without the LC filter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed()) {
            return simulate(scenario_path, out, no_filter);
        }
        if (cmp->parsed()) {
            return compare(out);
        }
        return sweep(profile, points, out, no_filter, seed);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalDivergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
