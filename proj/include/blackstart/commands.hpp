#pragma once

// The simulate, compare and sweep-residual commands as library calls. The
// executable only parses arguments and maps exceptions to exit codes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blackstart/scenario_file.hpp"
#include "blackstart/sim.hpp"

namespace blackstart {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;

/// Bad command-line usage (exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Parallel scenario budget: BLACKSTART_THREADS when it holds a positive
/// integer, otherwise the hardware concurrency (at least 1).
[[nodiscard]] std::size_t thread_budget();

/// Calls body(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by a body is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

/// Runs the scenario and writes waveforms.csv, trajectory.csv and
/// metrics.json into `out_dir` (created if missing). Nothing is written when
/// the simulation throws.
SimResult simulate_to_directory(const ScenarioFile& file, const std::filesystem::path& out_dir);

// compare

enum class ResidualCase { None, Residual, ResidualDemag };

[[nodiscard]] std::string_view to_string(ResidualCase rc);

struct Thresholds {
    double offset_fraction = 0.02;  ///< of lambda0
    double inrush_pu = 0.3;
    double surge_pu = 0.3;
};

struct CompareOptions {
    Thresholds thresholds;
    double residual_fraction = 0.5;  ///< residual magnitude as a fraction of lambda0
    /// Horizon and step of the no-filter natural-decay runs used when the
    /// offset is still present at the end of the energization window.
    double settle_horizon = 120.0;
    double settle_dt = 1e-5;
    std::size_t threads = 1;
};

/// Residual used by the comparison: the flux left by a DC pattern (+1, 0, -1),
/// i.e. 30 degrees from the alpha axis, scaled to `magnitude`.
[[nodiscard]] AlphaBeta comparison_residual(double magnitude);

/// Built-in scenario for one cell of the comparison matrix.
[[nodiscard]] Scenario comparison_scenario(ProfileKind method, ResidualCase rc, bool filter,
                                           const CompareOptions& options = {});

struct CompareRow {
    ProfileKind method = ProfileKind::Hard;
    ResidualCase residual = ResidualCase::None;
    bool filter = false;
    std::optional<Metrics> metrics;
    /// Profile-local time at which the natural-decay run first met the offset
    /// threshold; empty when the offset was already below it or never got there.
    std::optional<double> settling_time_s;
    bool offset_eliminated = false;
    bool inrush_suppressed = false;
    bool surge_suppressed = false;
    std::string error;  ///< non-empty when the run failed

    [[nodiscard]] bool ok() const { return error.empty(); }
};

/// Runs {hard, ultrafast, spiral} x {none, residual, residual + demag} x
/// {filter, no filter}. Failed runs are kept as rows with `error` set.
[[nodiscard]] std::vector<CompareRow> run_compare(const CompareOptions& options = {});

/// Per-method verdicts, taken from the no-residual rows: offset from both
/// filter settings, inrush from the no-filter row and surge from the filter row.
struct MethodVerdicts {
    ProfileKind method = ProfileKind::Hard;
    std::optional<bool> offset_eliminated;  ///< empty when a source row failed
    std::optional<bool> inrush_suppressed;
    std::optional<bool> surge_suppressed;
    std::optional<double> startup_time_s;
    std::optional<double> settling_time_s;
};

[[nodiscard]] std::vector<MethodVerdicts> method_verdicts(const std::vector<CompareRow>& rows);

inline constexpr std::string_view kComparisonHeader =
    "method,residual_case,filter,peak_i_pcc_pu,peak_i_inv_pu,flux_offset_wb,startup_time_s,"
    "settling_time_s,offset_eliminated,inrush_suppressed,surge_suppressed,status";

[[nodiscard]] std::string format_comparison_csv(const std::vector<CompareRow>& rows);
[[nodiscard]] std::string format_comparison_summary(const std::vector<CompareRow>& rows,
                                                    const CompareOptions& options = {});

/// Writes comparison.csv and summary.txt into `out_dir`.
void write_comparison(const std::filesystem::path& out_dir, const std::vector<CompareRow>& rows,
                      const CompareOptions& options = {});

// sweep-residual

struct SweepOptions {
    ProfileKind profile = ProfileKind::Hard;
    std::size_t points = 2;
    bool filter = true;
    /// When set, the residual direction is drawn uniformly from this seed;
    /// otherwise it lies along +alpha.
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
};

struct SweepPoint {
    double residual_wb = 0.0;
    AlphaBeta residual;
    Metrics metrics;
};

/// Residual direction (unit vector) used by a sweep.
[[nodiscard]] AlphaBeta sweep_direction(const SweepOptions& options);

/// Default scenario of the sweep with the given residual magnitude.
[[nodiscard]] Scenario sweep_scenario(const SweepOptions& options, double residual_wb);

/// Magnitudes 0 .. lambda_knee in `points` equal steps. Throws UsageError
/// when points < 2.
[[nodiscard]] std::vector<SweepPoint> run_sweep(const SweepOptions& options);

inline constexpr std::string_view kSweepHeader = "residual_wb,peak_i_pcc_pu,flux_offset_wb";

[[nodiscard]] std::string format_sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace blackstart
