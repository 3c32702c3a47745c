#pragma once

// Fixed-step RK4 integration of the inverter -> LC filter -> transformer
// plant, scenario orchestration (pre-fluxing, demagnetization, energization)
// and metrics extraction.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "blackstart/demag.hpp"
#include "blackstart/filter.hpp"
#include "blackstart/frames.hpp"
#include "blackstart/profiles.hpp"
#include "blackstart/transformer.hpp"

namespace blackstart {

/// Upper bound on the step when the LC filter is present.
inline constexpr double kMaxFilterStep = 2e-6;

struct Scenario {
    SystemParams params = SystemParams::rated_defaults();
    CoreParams core = CoreParams::defaults(SystemParams::rated_defaults());
    std::optional<FilterParams> filter = FilterParams{};
    MagnetizationProfile profile = profile::Hard{};
    AlphaBeta residual;
    bool demag_first = false;
    DemagParams demag;
    std::optional<PrefluxingConfig> prefluxing;
    double dt = 1e-6;
    double t_end = 0.1;  ///< horizon of the energization phase (s)
    bool control_zoh = false;

    /// Rated defaults with the LC filter and the given profile.
    static Scenario defaults(ProfileKind kind);

    void validate() const;
};

struct PlantState {
    FilterState filter;
    TransformerState core;
};

/// Inverter voltage as a function of absolute time.
using VoltageSource = std::function<ThreePhase(double)>;

/// Coupled plant. Without a filter the PCC is driven directly by the inverter
/// and only the transformer flux is integrated.
class Plant {
public:
    Plant(CoreParams core, std::optional<FilterParams> filter);

    [[nodiscard]] bool has_filter() const { return filter_.has_value(); }
    [[nodiscard]] const CoreParams& core() const { return core_; }

    /// One classical RK4 step; v_inv is evaluated at each stage time.
    /// Throws NumericalDivergence if the new state is not finite.
    [[nodiscard]] PlantState step(const PlantState& state, double t, double dt,
                                  const VoltageSource& v_inv) const;

    [[nodiscard]] ThreePhase v_pcc(const PlantState& state, const ThreePhase& v_inv) const;
    [[nodiscard]] ThreePhase i_pcc(const PlantState& state, const ThreePhase& v_inv) const;
    [[nodiscard]] ThreePhase i_inv(const PlantState& state, const ThreePhase& v_inv) const;

private:
    struct Derivative {
        ThreePhase di_inv;
        ThreePhase dv_c;
        ThreePhase dlambda;
    };
    [[nodiscard]] Derivative derivative(const PlantState& s, const ThreePhase& v_inv) const;

    CoreParams core_;
    std::optional<FilterParams> filter_;
};

/// Energization-phase inverter voltage for the scenario's profile, with the
/// zero-order hold at 1/f_sw applied when control_zoh is set. `t_local` is
/// time since the profile started.
[[nodiscard]] ThreePhase profile_inverter_voltage(const Scenario& scenario, double t_local);

/// Advances the energization phase by one step starting at profile-local t.
[[nodiscard]] PlantState step(const Scenario& scenario, const PlantState& state, double t,
                              double dt);

enum class SimPhase { Prefluxing, Demag, Profile };

struct Sample {
    double t = 0.0;  ///< absolute time (s)
    ThreePhase v_inv;
    ThreePhase v_pcc;
    ThreePhase i_inv;
    ThreePhase i_pcc;
    ThreePhase lambda;
    AlphaBeta lambda_ab;
};

struct Metrics {
    ProfileKind method = ProfileKind::Hard;
    double peak_i_pcc_pu = 0.0;
    double peak_i_inv_pu = 0.0;
    double flux_dc_offset_wb = 0.0;
    AlphaBeta flux_dc_offset;  ///< trailing-cycle mean vector (Wb)
    std::optional<double> startup_time_s;  ///< empty when not reached
};

struct DemagReport {
    double tau_measured = 0.0;
    double duration = 0.0;  ///< total demag time (s)
};

struct SimResult {
    std::vector<Sample> series;   ///< full run on a uniform grid
    std::size_t profile_start = 0;  ///< index of the first energization sample
    double profile_start_time = 0.0;
    std::optional<DemagReport> demag;
    Metrics metrics;

    [[nodiscard]] std::span<const Sample> profile_series() const {
        return std::span<const Sample>(series).subspan(profile_start);
    }
};

struct MetricsOptions {
    /// Time lag used to test for steady rotation; 0 means one sample.
    double rotation_lag = 0.0;
    double band = 0.05;  ///< start-up tolerance band (fraction of rated)
};

/// Metrics over an energization-phase series (times need not start at 0;
/// start-up time is measured from the first sample).
///
/// Start-up time is the first sample after which, for T0/2 continuously, the
/// inverter output voltage has magnitude within +-band of the rated peak and
/// rotates at omega0, i.e. |v(t+h) - v(t) e^{j omega0 h}| / h <= band omega0 V.
[[nodiscard]] Metrics compute_metrics(std::span<const Sample> series, const SystemParams& p,
                                      ProfileKind method, const MetricsOptions& options = {});

/// Receives every sample together with the phase it belongs to; returning
/// false stops the run after that sample.
using SampleObserver = std::function<bool(const Sample&, SimPhase)>;

struct RunSummary {
    std::optional<DemagReport> demag;
    std::size_t profile_start = 0;
    double profile_start_time = 0.0;
    PlantState final_state;
    bool stopped = false;  ///< the observer ended the run early
};

/// Runs the scenario and streams samples to `observer` without storing them.
RunSummary run_streaming(const Scenario& scenario, const SampleObserver& observer);

struct SettlingResult {
    std::optional<double> time;  ///< profile-local time, empty if not reached
    AlphaBeta last_offset;       ///< last evaluated fundamental-period mean (Wb)
};

/// Steps the scenario's energization phase one fundamental period at a time
/// and reports the end of the first period whose mean flux magnitude is below
/// `threshold_wb`. `scenario.t_end` bounds the search; samples are not stored.
[[nodiscard]] SettlingResult offset_settling_time(const Scenario& scenario, double threshold_wb);

/// Runs the scenario: optional pre-fluxing, optional demagnetization, then the
/// magnetization profile from its local t = 0 for t_end seconds.
[[nodiscard]] SimResult run(const Scenario& scenario);

}  // namespace blackstart
