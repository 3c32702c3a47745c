#include <doctest.h>

#include "approx.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>

#include "blackstart/commands.hpp"
#include "blackstart/report.hpp"
#include "oracles.hpp"

using namespace blackstart;
namespace fs = std::filesystem;

namespace {

int run_tool(const std::string& args) {
    const std::string cmd = std::string(BLACKSTART_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

ScenarioFile light_scenario(const std::string& profile) {
    // Coarse output keeps the files small.
    return parse_scenario_file(R"({"profile": ")" + profile + R"(", "output_stride": 50})");
}

}  // namespace

TEST_CASE("simulate writes the three outputs") {
    const oracle::TempDir dir("simulate");
    const fs::path out = dir.path() / "run";
    const ScenarioFile f = light_scenario("spiral");
    const SimResult r = simulate_to_directory(f, out);

    const std::string waveforms = oracle::read_file(out / "waveforms.csv");
    const std::string trajectory = oracle::read_file(out / "trajectory.csv");
    CHECK(waveforms.rfind(std::string(kWaveformsHeader) + "\n", 0) == 0);
    CHECK(trajectory.rfind(std::string(kTrajectoryHeader) + "\n", 0) == 0);
    CHECK(std::count(trajectory.begin(), trajectory.end(), '\n') == 1 + 2001);
    CHECK_FALSE(fs::exists(out / "metrics.json.tmp"));

    const auto doc = nlohmann::json::parse(oracle::read_file(out / "metrics.json"));
    CHECK(doc["schema_version"] == kMetricsSchemaVersion);
    CHECK(doc["tool_version"] == std::string(kToolVersion));
    CHECK(doc["metrics"]["method"] == "spiral");
    CHECK(doc["metrics"]["startup_time_s"].get<double>() == *r.metrics.startup_time_s);
    CHECK(doc["metrics"]["peak_i_pcc_pu"].get<double>() == r.metrics.peak_i_pcc_pu);
    CHECK(doc["metrics"]["flux_dc_offset_wb"].get<double>() == r.metrics.flux_dc_offset_wb);
    CHECK(doc["demag"].is_null());
    CHECK(doc["scenario"]["profile"] == "spiral");
    CHECK(doc["scenario"]["output_stride"] == 50);
    // Spiral start-up completes after one fundamental period.
    CHECK(std::abs(doc["metrics"]["startup_time_s"].get<double>() - 1.0 / 60.0) <= 1e-6);
}

TEST_CASE("ultra-fast trajectory runs out to lambda0 then circles the origin") {
    const oracle::TempDir dir("trajectory");
    ScenarioFile f = parse_scenario_file(R"({"profile": "ultrafast", "filter": null})");
    simulate_to_directory(f, dir.path());
    std::ifstream in(dir.path() / "trajectory.csv");
    std::string line;
    std::getline(in, line);
    const double l0 = f.scenario.params.lambda0();
    const double t_d = 1.0 / f.scenario.params.omega0();
    double worst_line = 0.0;
    double worst_circle = 0.0;
    while (std::getline(in, line)) {
        double t = 0.0, a = 0.0, b = 0.0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &a, &b) == 3);
        if (t <= t_d) {
            worst_line = std::max(worst_line, std::abs(b));
        } else if (t > 2 * t_d) {
            worst_circle = std::max(worst_circle, std::abs(std::hypot(a, b) - l0));
        }
    }
    CHECK(worst_line < 0.005 * l0);
    CHECK(worst_circle < 0.02 * l0);
}

TEST_CASE("identical scenarios give byte-identical files") {
    const oracle::TempDir dir("determinism");
    const ScenarioFile f = light_scenario("ultrafast");
    simulate_to_directory(f, dir.path() / "a");
    simulate_to_directory(f, dir.path() / "b");
    for (const char* name : {"waveforms.csv", "trajectory.csv", "metrics.json"}) {
        CAPTURE(name);
        CHECK(oracle::read_file(dir.path() / "a" / name) == oracle::read_file(dir.path() / "b" / name));
    }
}

TEST_CASE("metrics document keys are sorted") {
    const oracle::TempDir dir("keys");
    simulate_to_directory(light_scenario("hard"), dir.path());
    const std::string text = oracle::read_file(dir.path() / "metrics.json");
    const std::size_t demag = text.find("\"demag\"");
    const std::size_t metrics = text.find("\"metrics\"");
    const std::size_t schema = text.find("\"schema_version\"");
    const std::size_t version = text.find("\"tool_version\"");
    CHECK(demag < metrics);
    CHECK(metrics < schema);
    CHECK(schema < version);
    CHECK(text.back() == '\n');
}

TEST_CASE("atomic write leaves no temporary on failure") {
    const oracle::TempDir dir("atomic");
    const fs::path target = dir.path() / "x.txt";
    write_file_atomic(target, "first\n");
    CHECK_THROWS_AS(write_file_atomic(target, [](std::ostream& out) {
                        out << "partial";
                        throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    CHECK(oracle::read_file(target) == "first\n");
    CHECK_FALSE(fs::exists(dir.path() / "x.txt.tmp"));
}

TEST_CASE("command-line exit codes") {
    const oracle::TempDir dir("cli");
    const fs::path good = dir.path() / "good.json";
    const fs::path bad = dir.path() / "bad.json";
    const fs::path unknown = dir.path() / "unknown.json";
    const fs::path diverge = dir.path() / "diverge.json";
    write_text(good, R"({"profile": "spiral", "output_stride": 100})");
    write_text(bad, "{\"profile\": \"spiral\",");
    write_text(unknown, R"({"profile": "spiral", "colour": "red"})");
    write_text(diverge, R"({"profile": "hard", "filter": null, "core": {"r_wind": 1e9}})");

    CHECK(run_tool("simulate --scenario " + good.string() + " --out " + (dir.path() / "ok").string()) == 0);
    CHECK(fs::exists(dir.path() / "ok" / "metrics.json"));

    CHECK(run_tool("simulate --scenario " + bad.string() + " --out " + (dir.path() / "bad").string()) == 2);
    CHECK_FALSE(fs::exists(dir.path() / "bad"));
    CHECK(run_tool("simulate --scenario " + unknown.string() + " --out " + (dir.path() / "u").string()) == 2);
    CHECK_FALSE(fs::exists(dir.path() / "u"));
    CHECK(run_tool("simulate --scenario " + diverge.string() + " --out " + (dir.path() / "d").string()) == 3);
    CHECK_FALSE(fs::exists(dir.path() / "d" / "metrics.json"));

    CHECK(run_tool("sweep-residual --profile hard --points 1 --out " + (dir.path() / "s").string()) == 2);
    CHECK(run_tool("sweep-residual --profile snail --points 3 --out " + (dir.path() / "s").string()) == 2);
    CHECK(run_tool("simulate --out " + dir.path().string()) == 2);
    CHECK(run_tool("frobnicate") == 2);
    CHECK(run_tool("") == 2);
    CHECK(run_tool("--help") == 0);
}

TEST_CASE("sweep-residual") {
    SUBCASE("fewer than two points is a usage error") {
        SweepOptions o;
        o.points = 1;
        CHECK_THROWS_AS((void)run_sweep(o), UsageError);
    }
    SUBCASE("first point reproduces the no-residual run exactly") {
        SweepOptions o;
        o.profile = ProfileKind::UltraFast;
        o.points = 2;
        const auto points = run_sweep(o);
        const Metrics direct = run(Scenario::defaults(ProfileKind::UltraFast)).metrics;
        CHECK(points[0].residual_wb == 0.0);
        CHECK(points[0].metrics.peak_i_pcc_pu == direct.peak_i_pcc_pu);
        CHECK(points[0].metrics.peak_i_inv_pu == direct.peak_i_inv_pu);
        CHECK(points[0].metrics.flux_dc_offset_wb == direct.flux_dc_offset_wb);
        CHECK(points[1].residual_wb == CoreParams::defaults(SystemParams::rated_defaults()).lambda_knee);
        CHECK(points[1].residual.beta == 0.0);
    }
    SUBCASE("hard-start inrush grows with residual magnitude") {
        SweepOptions o;
        o.profile = ProfileKind::Hard;
        o.points = 5;
        o.filter = false;
        o.threads = 2;
        const auto points = run_sweep(o);
        for (std::size_t i = 1; i < points.size(); ++i) {
            CHECK(points[i].residual_wb > points[i - 1].residual_wb);
            CHECK(points[i].metrics.peak_i_pcc_pu >= points[i - 1].metrics.peak_i_pcc_pu);
        }
        const std::string csv = format_sweep_csv(points);
        CHECK(csv.rfind("residual_wb,peak_i_pcc_pu,flux_offset_wb\n0,", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    }
    SUBCASE("seeded direction is a reproducible unit vector") {
        SweepOptions o;
        o.seed = 42;
        const AlphaBeta d1 = sweep_direction(o);
        const AlphaBeta d2 = sweep_direction(o);
        CHECK(d1 == d2);
        CHECK(d1.norm() == approx(1.0));
        o.seed = 43;
        CHECK_FALSE(sweep_direction(o) == d1);
        CHECK(sweep_scenario(o, 0.0).residual.norm() == 0.0);
        CHECK(sweep_scenario(o, 0.5).residual.norm() == approx(0.5));
    }
}

TEST_CASE("comparison formatting and verdict roll-up") {
    std::vector<CompareRow> rows;
    for (const ProfileKind m : {ProfileKind::Hard, ProfileKind::UltraFast, ProfileKind::Spiral}) {
        for (const bool filter : {false, true}) {
            CompareRow row;
            row.method = m;
            row.filter = filter;
            Metrics metrics;
            metrics.method = m;
            metrics.peak_i_pcc_pu = m == ProfileKind::Hard ? 1.8 : 0.05;
            metrics.peak_i_inv_pu = filter && m != ProfileKind::Spiral ? 1.7 : metrics.peak_i_pcc_pu;
            metrics.flux_dc_offset_wb = m == ProfileKind::Hard ? 0.75 : 1e-4;
            metrics.startup_time_s = m == ProfileKind::Hard ? 0.0 : 0.01;
            row.metrics = metrics;
            row.settling_time_s = m == ProfileKind::Hard ? std::optional<double>(42.5) : std::nullopt;
            row.offset_eliminated = true;
            row.inrush_suppressed = metrics.peak_i_pcc_pu < 0.3;
            row.surge_suppressed = metrics.peak_i_inv_pu < 0.3;
            rows.push_back(row);
        }
    }
    CompareRow failed;
    failed.method = ProfileKind::Spiral;
    failed.residual = ResidualCase::ResidualDemag;
    failed.error = "demag failed to converge";
    rows.push_back(failed);

    const auto v = method_verdicts(rows);
    REQUIRE(v.size() == 3);
    CHECK(*v[0].offset_eliminated);
    CHECK_FALSE(*v[0].inrush_suppressed);
    CHECK_FALSE(*v[0].surge_suppressed);
    CHECK(*v[0].settling_time_s == 42.5);
    CHECK(*v[1].inrush_suppressed);
    CHECK_FALSE(*v[1].surge_suppressed);
    CHECK(*v[2].surge_suppressed);

    const std::string csv = format_comparison_csv(rows);
    CHECK(csv.rfind(std::string(kComparisonHeader) + "\n", 0) == 0);
    CHECK(csv.find("\nhard,none,off,1.8,1.8,0.75,0,42.5,O,X,X,ok\n") != std::string::npos);
    CHECK(csv.find("\nspiral,residual+demag,off,,,,,,,,,error: demag failed to converge\n") !=
          std::string::npos);

    const std::string summary = format_comparison_summary(rows);
    CHECK(summary.find("Inrush current suppression  X             O             O") != std::string::npos);
    CHECK(summary.find("Surge current suppression   X             X             O") != std::string::npos);
    CHECK(summary.find("FAILED: demag failed to converge") != std::string::npos);
    CHECK(summary.find("after 42.50 s") != std::string::npos);
}

TEST_CASE("comparison scenarios") {
    const double l0 = SystemParams::rated_defaults().lambda0();
    const Scenario s = comparison_scenario(ProfileKind::Spiral, ResidualCase::ResidualDemag, false);
    CHECK_FALSE(s.filter.has_value());
    CHECK(s.demag_first);
    CHECK(s.residual.norm() == approx(0.5 * l0));
    // Direction of the flux left by a (+1, 0, -1) DC pattern.
    const oracle::Vec2 dir = oracle::clarke(1.0, 0.0, -1.0);
    CHECK(s.residual.beta / s.residual.alpha == approx(dir.y / dir.x));
    CHECK(comparison_scenario(ProfileKind::Hard, ResidualCase::None, true).residual.norm() == 0.0);
    CHECK(to_string(ResidualCase::ResidualDemag) == "residual+demag");
}

TEST_CASE("thread budget and parallel map") {
    ::setenv("BLACKSTART_THREADS", "3", 1);
    CHECK(thread_budget() == 3);
    ::setenv("BLACKSTART_THREADS", "zero", 1);
    CHECK(thread_budget() >= 1);
    ::unsetenv("BLACKSTART_THREADS");

    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::count(hits.begin(), hits.end(), 1) == 100);

    std::atomic<int> calls{0};
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [&](std::size_t i) {
                                     ++calls;
                                     if (i == 5) {
                                         throw std::runtime_error("x");
                                     }
                                 }),
                    std::runtime_error);
    CHECK(calls == 10);
}
