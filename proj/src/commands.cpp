#include "blackstart/commands.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

#include "blackstart/report.hpp"

namespace blackstart {

std::size_t thread_budget() {
    if (const char* env = std::getenv("BLACKSTART_THREADS")) {
        const std::string_view text(env);
        std::size_t n = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), n);
        if (res.ec == std::errc() && res.ptr == text.data() + text.size() && n > 0) {
            return n;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
    threads = std::min(std::max<std::size_t>(threads, 1), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

SimResult simulate_to_directory(const ScenarioFile& file, const std::filesystem::path& out_dir) {
    SimResult result = run(file.scenario);
    std::filesystem::create_directories(out_dir);
    const std::span<const Sample> series(result.series);
    write_file_atomic(out_dir / "waveforms.csv", [&](std::ostream& out) {
        write_waveforms_csv(out, series, file.output_stride);
    });
    write_file_atomic(out_dir / "trajectory.csv", [&](std::ostream& out) {
        write_trajectory_csv(out, series, file.output_stride);
    });
    write_file_atomic(out_dir / "metrics.json", metrics_document(result, file).dump(2) + "\n");
    return result;
}

// compare

std::string_view to_string(ResidualCase rc) {
    switch (rc) {
        case ResidualCase::None:
            return "none";
        case ResidualCase::Residual:
            return "residual";
        case ResidualCase::ResidualDemag:
            return "residual+demag";
    }
    return "none";
}

AlphaBeta comparison_residual(double magnitude) {
    const double angle = std::numbers::pi / 6.0;
    return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

Scenario comparison_scenario(ProfileKind method, ResidualCase rc, bool filter,
                             const CompareOptions& options) {
    Scenario s = Scenario::defaults(method);
    if (!filter) {
        s.filter.reset();
    }
    if (rc != ResidualCase::None) {
        s.residual = comparison_residual(options.residual_fraction * s.params.lambda0());
    }
    s.demag_first = rc == ResidualCase::ResidualDemag;
    return s;
}

namespace {

constexpr ProfileKind kMethods[] = {ProfileKind::Hard, ProfileKind::UltraFast, ProfileKind::Spiral};
constexpr ResidualCase kCases[] = {ResidualCase::None, ResidualCase::Residual,
                                   ResidualCase::ResidualDemag};

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (const char c : text) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

std::string optional_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

const char* mark(bool v) { return v ? "O" : "X"; }

std::string mark(const std::optional<bool>& v) { return v ? mark(*v) : "?"; }

std::string fixed(double v, int precision) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(precision);
    os << v;
    return os.str();
}

}  // namespace

std::vector<CompareRow> run_compare(const CompareOptions& options) {
    std::vector<CompareRow> rows;
    for (const ProfileKind method : kMethods) {
        for (const ResidualCase rc : kCases) {
            for (const bool filter : {false, true}) {
                CompareRow row;
                row.method = method;
                row.residual = rc;
                row.filter = filter;
                rows.push_back(row);
            }
        }
    }
    const double threshold = options.thresholds.offset_fraction * SystemParams::rated_defaults().lambda0();

    parallel_for(rows.size(), options.threads, [&](std::size_t i) {
        CompareRow& row = rows[i];
        try {
            const SimResult r = run(comparison_scenario(row.method, row.residual, row.filter, options));
            row.metrics = r.metrics;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    // Offsets still present after the energization window are followed by a
    // long natural-decay run. The LC filter does not affect that decay, so one
    // run per (method, residual case) serves both filter settings.
    std::map<std::pair<ProfileKind, ResidualCase>, std::optional<double>> settle;
    std::map<std::pair<ProfileKind, ResidualCase>, std::string> settle_error;
    for (const CompareRow& row : rows) {
        if (row.ok() && !(row.metrics->flux_dc_offset_wb < threshold)) {
            settle[{row.method, row.residual}] = std::nullopt;
        }
    }
    std::vector<std::pair<ProfileKind, ResidualCase>> keys;
    for (const auto& [key, value] : settle) {
        keys.push_back(key);
    }
    std::mutex settle_mutex;
    parallel_for(keys.size(), options.threads, [&](std::size_t i) {
        Scenario s = comparison_scenario(keys[i].first, keys[i].second, false, options);
        s.dt = options.settle_dt;
        s.t_end = options.settle_horizon;
        try {
            const SettlingResult r = offset_settling_time(s, threshold);
            const std::lock_guard lock(settle_mutex);
            settle[keys[i]] = r.time;
        } catch (const std::exception& e) {
            const std::lock_guard lock(settle_mutex);
            settle_error[keys[i]] = std::string("settling run: ") + e.what();
        }
    });

    for (CompareRow& row : rows) {
        if (!row.ok()) {
            continue;
        }
        const Metrics& m = *row.metrics;
        const auto key = std::make_pair(row.method, row.residual);
        if (const auto it = settle_error.find(key); it != settle_error.end()) {
            row.error = it->second;
            continue;
        }
        if (const auto it = settle.find(key); it != settle.end()) {
            row.settling_time_s = it->second;
        }
        row.offset_eliminated = m.flux_dc_offset_wb < threshold || row.settling_time_s.has_value();
        row.inrush_suppressed = m.peak_i_pcc_pu < options.thresholds.inrush_pu;
        row.surge_suppressed = m.peak_i_inv_pu < options.thresholds.surge_pu;
    }
    return rows;
}

std::vector<MethodVerdicts> method_verdicts(const std::vector<CompareRow>& rows) {
    std::vector<MethodVerdicts> out;
    for (const ProfileKind method : kMethods) {
        MethodVerdicts v;
        v.method = method;
        const CompareRow* bare = nullptr;
        const CompareRow* filtered = nullptr;
        for (const CompareRow& row : rows) {
            if (row.method == method && row.residual == ResidualCase::None) {
                (row.filter ? filtered : bare) = &row;
            }
        }
        if (bare && bare->ok()) {
            v.inrush_suppressed = bare->inrush_suppressed;
            v.startup_time_s = bare->metrics->startup_time_s;
            v.settling_time_s = bare->settling_time_s;
        }
        if (filtered && filtered->ok()) {
            v.surge_suppressed = filtered->surge_suppressed;
        }
        if (bare && filtered && bare->ok() && filtered->ok()) {
            v.offset_eliminated = bare->offset_eliminated && filtered->offset_eliminated;
        }
        out.push_back(v);
    }
    return out;
}

std::string format_comparison_csv(const std::vector<CompareRow>& rows) {
    std::string out(kComparisonHeader);
    out += '\n';
    for (const CompareRow& row : rows) {
        out += std::string(to_string(row.method)) + ',' + std::string(to_string(row.residual)) + ',' +
               (row.filter ? "on" : "off") + ',';
        if (row.ok()) {
            const Metrics& m = *row.metrics;
            out += format_number(m.peak_i_pcc_pu) + ',' + format_number(m.peak_i_inv_pu) + ',' +
                   format_number(m.flux_dc_offset_wb) + ',' + optional_number(m.startup_time_s) +
                   ',' + optional_number(row.settling_time_s) + ',' + mark(row.offset_eliminated) +
                   ',' + mark(row.inrush_suppressed) + ',' + mark(row.surge_suppressed) + ",ok\n";
        } else {
            out += ",,,,,,,," + csv_field("error: " + row.error) + '\n';
        }
    }
    return out;
}

std::string format_comparison_summary(const std::vector<CompareRow>& rows,
                                      const CompareOptions& options) {
    const SystemParams p = SystemParams::rated_defaults();
    const double threshold = options.thresholds.offset_fraction * p.lambda0();
    std::ostringstream os;
    os << "Transformer magnetization methods\n\n"
       << "Thresholds: flux offset < " << fixed(threshold * 1e3, 2) << " mWb ("
       << fixed(options.thresholds.offset_fraction * 100.0, 1) << "% of lambda0), peak i_pcc < "
       << options.thresholds.inrush_pu << " p.u., peak i_inv < " << options.thresholds.surge_pu
       << " p.u. (base " << p.i_rated_peak() << " A)\n\n";

    const std::vector<MethodVerdicts> verdicts = method_verdicts(rows);
    const auto cell = [](const std::string& s) {
        std::string out = s;
        out.resize(std::max<std::size_t>(out.size(), 14), ' ');
        return out;
    };
    const auto row = [&](const std::string& label, const auto& value) {
        std::string line = cell(label);
        line.resize(28, ' ');
        for (const MethodVerdicts& v : verdicts) {
            line += cell(value(v));
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        os << line << "\n";
    };
    row("", [](const MethodVerdicts& v) { return std::string(to_string(v.method)); });
    row("Flux DC offset elimination", [](const MethodVerdicts& v) { return mark(v.offset_eliminated); });
    row("Inrush current suppression", [](const MethodVerdicts& v) { return mark(v.inrush_suppressed); });
    row("Surge current suppression", [](const MethodVerdicts& v) { return mark(v.surge_suppressed); });
    row("Start-up time", [](const MethodVerdicts& v) -> std::string {
        if (!v.startup_time_s) {
            return "not reached";
        }
        if (*v.startup_time_s == 0.0) {
            return "instantaneous";
        }
        return fixed(*v.startup_time_s * 1e3, 3) + " ms";
    });
    for (const MethodVerdicts& v : verdicts) {
        if (v.settling_time_s) {
            os << "  " << to_string(v.method) << ": offset decays below threshold after "
               << fixed(*v.settling_time_s, 2) << " s\n";
        }
    }

    os << "\nRuns\n";
    os << "method     residual        filter  i_pcc[pu]  i_inv[pu]  offset[mWb]  startup[ms]  "
          "settle[s]  offset inrush surge\n";
    for (const CompareRow& row : rows) {
        std::string line = std::string(to_string(row.method));
        line.resize(11, ' ');
        line += to_string(row.residual);
        line.resize(27, ' ');
        line += row.filter ? "on" : "off";
        line.resize(35, ' ');
        if (!row.ok()) {
            os << line << "FAILED: " << row.error << "\n";
            continue;
        }
        const Metrics& m = *row.metrics;
        line += fixed(m.peak_i_pcc_pu, 3);
        line.resize(46, ' ');
        line += fixed(m.peak_i_inv_pu, 3);
        line.resize(57, ' ');
        line += fixed(m.flux_dc_offset_wb * 1e3, 2);
        line.resize(70, ' ');
        line += m.startup_time_s ? fixed(*m.startup_time_s * 1e3, 3) : "-";
        line.resize(83, ' ');
        line += row.settling_time_s ? fixed(*row.settling_time_s, 2) : "-";
        line.resize(94, ' ');
        line += mark(row.offset_eliminated);
        line.resize(101, ' ');
        line += mark(row.inrush_suppressed);
        line.resize(108, ' ');
        line += mark(row.surge_suppressed);
        os << line << "\n";
    }
    return os.str();
}

void write_comparison(const std::filesystem::path& out_dir, const std::vector<CompareRow>& rows,
                      const CompareOptions& options) {
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "comparison.csv", format_comparison_csv(rows));
    write_file_atomic(out_dir / "summary.txt", format_comparison_summary(rows, options));
}

// sweep-residual

AlphaBeta sweep_direction(const SweepOptions& options) {
    if (!options.seed) {
        return {1.0, 0.0};
    }
    std::mt19937_64 rng(*options.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double theta = angle(rng);
    return {std::cos(theta), std::sin(theta)};
}

Scenario sweep_scenario(const SweepOptions& options, double residual_wb) {
    Scenario s = Scenario::defaults(options.profile);
    if (!options.filter) {
        s.filter.reset();
    }
    if (residual_wb != 0.0) {
        s.residual = residual_wb * sweep_direction(options);
    }
    return s;
}

std::vector<SweepPoint> run_sweep(const SweepOptions& options) {
    if (options.points < 2) {
        throw UsageError("--points must be at least 2");
    }
    const double knee = CoreParams::defaults(SystemParams::rated_defaults()).lambda_knee;
    std::vector<SweepPoint> points(options.points);
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i].residual_wb =
            i + 1 == points.size() ? knee
                                   : knee * static_cast<double>(i) / static_cast<double>(points.size() - 1);
    }
    parallel_for(points.size(), options.threads, [&](std::size_t i) {
        const Scenario s = sweep_scenario(options, points[i].residual_wb);
        points[i].residual = s.residual;
        points[i].metrics = run(s).metrics;
    });
    return points;
}

std::string format_sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out(kSweepHeader);
    out += '\n';
    for (const SweepPoint& p : points) {
        out += format_number(p.residual_wb) + ',' + format_number(p.metrics.peak_i_pcc_pu) + ',' +
               format_number(p.metrics.flux_dc_offset_wb) + '\n';
    }
    return out;
}

}  // namespace blackstart
