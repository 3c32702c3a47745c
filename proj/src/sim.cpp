#include "blackstart/sim.hpp"

#include <algorithm>
#include <cmath>

#include "blackstart/errors.hpp"

namespace blackstart {

namespace {

PlantState advanced(const PlantState& s, const ThreePhase& di, const ThreePhase& dv,
                    const ThreePhase& dl, double h) {
    PlantState out = s;
    out.filter.i_inv += h * di;
    out.filter.v_c += h * dv;
    out.core.lambda += h * dl;
    return out;
}

bool is_finite(const PlantState& s) {
    return s.filter.i_inv.is_finite() && s.filter.v_c.is_finite() && s.core.lambda.is_finite();
}

std::size_t step_count(double duration, double dt) {
    return static_cast<std::size_t>(std::llround(duration / dt));
}

}  // namespace

Scenario Scenario::defaults(ProfileKind kind) {
    Scenario s;
    s.profile = make_profile(kind, s.params);
    s.core = CoreParams::defaults(s.params);
    return s;
}

void Scenario::validate() const {
    core.validate();
    if (filter) {
        filter->validate();
    }
    if (demag_first) {
        demag.validate();
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("dt must be positive");
    }
    if (filter && dt > kMaxFilterStep * (1.0 + 1e-9)) {
        throw InvalidParameter("dt must not exceed 2e-6 s when the LC filter is present");
    }
    if (!(t_end >= 5.0 * params.t0() * (1.0 - 1e-9))) {
        throw InvalidParameter("t_end must cover at least five fundamental periods");
    }
    if (prefluxing && (!(prefluxing->duration >= 0.0) || !prefluxing->pattern_v.is_finite())) {
        throw InvalidParameter("prefluxing needs a finite pattern and non-negative duration");
    }
}

Plant::Plant(CoreParams core, std::optional<FilterParams> filter)
    : core_(core), filter_(filter) {
    core_.validate();
    if (filter_) {
        filter_->validate();
    }
}

Plant::Derivative Plant::derivative(const PlantState& s, const ThreePhase& v_inv) const {
    if (!filter_) {
        const TransformerDerivative td = state_derivative(core_, s.core, v_inv);
        return {{}, {}, td.dlambda_dt};
    }
    const TransformerDerivative td = state_derivative(core_, s.core, s.filter.v_c);
    const FilterDerivative fd = filter_derivative(*filter_, s.filter, v_inv, td.i_pcc);
    return {fd.di_inv_dt, fd.dv_c_dt, td.dlambda_dt};
}

PlantState Plant::step(const PlantState& s, double t, double dt, const VoltageSource& v_inv) const {
    const double h = 0.5 * dt;
    const ThreePhase v_mid = v_inv(t + h);
    const Derivative k1 = derivative(s, v_inv(t));
    const Derivative k2 = derivative(advanced(s, k1.di_inv, k1.dv_c, k1.dlambda, h), v_mid);
    const Derivative k3 = derivative(advanced(s, k2.di_inv, k2.dv_c, k2.dlambda, h), v_mid);
    const Derivative k4 = derivative(advanced(s, k3.di_inv, k3.dv_c, k3.dlambda, dt), v_inv(t + dt));

    const double w = dt / 6.0;
    PlantState next = s;
    next.core.lambda += w * (k1.dlambda + 2.0 * k2.dlambda + 2.0 * k3.dlambda + k4.dlambda);
    if (filter_) {
        next.filter.i_inv += w * (k1.di_inv + 2.0 * k2.di_inv + 2.0 * k3.di_inv + k4.di_inv);
        next.filter.v_c += w * (k1.dv_c + 2.0 * k2.dv_c + 2.0 * k3.dv_c + k4.dv_c);
    }
    if (!is_finite(next)) {
        throw NumericalDivergence(t + dt);
    }
    return next;
}

ThreePhase Plant::v_pcc(const PlantState& state, const ThreePhase& v_inv) const {
    return filter_ ? state.filter.v_c : v_inv;
}

ThreePhase Plant::i_pcc(const PlantState& state, const ThreePhase& v_inv) const {
    return terminal_current(core_, state.core, v_pcc(state, v_inv));
}

ThreePhase Plant::i_inv(const PlantState& state, const ThreePhase& v_inv) const {
    return filter_ ? state.filter.i_inv : i_pcc(state, v_inv);
}

ThreePhase profile_inverter_voltage(const Scenario& scenario, double t_local) {
    double t = t_local;
    if (scenario.control_zoh) {
        const double f_sw = scenario.params.f_sw();
        t = std::floor(t_local * f_sw + 1e-9) / f_sw;
    }
    return alphabeta_to_abc(profile_voltage(scenario.profile, scenario.params, t));
}

PlantState step(const Scenario& scenario, const PlantState& state, double t, double dt) {
    const Plant plant(scenario.core, scenario.filter);
    return plant.step(state, t, dt,
                      [&scenario](double tl) { return profile_inverter_voltage(scenario, tl); });
}

RunSummary run_streaming(const Scenario& scenario, const SampleObserver& observer) {
    scenario.validate();
    const Plant plant(scenario.core, scenario.filter);
    const double dt = scenario.dt;

    PlantState state;
    state.core = set_residual_flux(state.core, scenario.residual, scenario.params);

    std::size_t k = 0;  // global step index, t = k * dt
    const auto emit = [&](const ThreePhase& v_inv, SimPhase phase) {
        Sample s;
        s.t = static_cast<double>(k) * dt;
        s.v_inv = v_inv;
        s.v_pcc = plant.v_pcc(state, v_inv);
        s.i_pcc = terminal_current(plant.core(), state.core, s.v_pcc);
        s.i_inv = plant.has_filter() ? state.filter.i_inv : s.i_pcc;
        s.lambda = state.core.lambda;
        s.lambda_ab = abc_to_alphabeta(state.core.lambda);
        return observer(s, phase);
    };
    RunSummary summary;
    const auto stop = [&] {
        summary.final_state = state;
        summary.stopped = true;
        return summary;
    };

    if (scenario.prefluxing) {
        const ThreePhase pattern = scenario.prefluxing->pattern_v;
        const auto source = [pattern](double) { return pattern; };
        const std::size_t n = step_count(scenario.prefluxing->duration, dt);
        for (std::size_t i = 0; i < n; ++i, ++k) {
            if (!emit(pattern, SimPhase::Prefluxing)) {
                return stop();
            }
            state = plant.step(state, static_cast<double>(k) * dt, dt, source);
        }
    }

    if (scenario.demag_first) {
        const double l_eff = scenario.core.l_sat + (scenario.filter ? scenario.filter->l_f : 0.0);
        const double r_eff = scenario.core.r_wind + (scenario.filter ? scenario.filter->r_damp : 0.0);
        const CurrentLoopGains gains = CurrentLoopGains::pole_placement(
            scenario.demag.ctrl_bandwidth, l_eff, r_eff, 0.5 * scenario.params.v_dc());

        const std::size_t k_start = k;
        DemagState ds;
        ThreePhase last_command;
        for (;;) {
            const ThreePhase measured = plant.i_inv(state, last_command);
            const DemagCommand cmd = demag_controller(scenario.demag, gains, ds, measured, dt);
            ds = cmd.next;
            if (ds.phase == DemagPhase::Done) {
                break;
            }
            if (!emit(cmd.v_inv, SimPhase::Demag)) {
                return stop();
            }
            const ThreePhase v = cmd.v_inv;
            state = plant.step(state, static_cast<double>(k) * dt, dt, [v](double) { return v; });
            last_command = v;
            ++k;
        }
        summary.demag = DemagReport{ds.tau_measured, static_cast<double>(k - k_start) * dt};
    }

    summary.profile_start = k;
    summary.profile_start_time = static_cast<double>(k) * dt;
    const auto source = [&scenario](double tl) { return profile_inverter_voltage(scenario, tl); };
    const std::size_t n = step_count(scenario.t_end, dt);
    for (std::size_t i = 0; i <= n; ++i, ++k) {
        const double t_local = static_cast<double>(i) * dt;
        if (!emit(source(t_local), SimPhase::Profile)) {
            return stop();
        }
        if (i < n) {
            state = plant.step(state, t_local, dt, source);
        }
    }
    summary.final_state = state;
    return summary;
}

SimResult run(const Scenario& scenario) {
    SimResult result;
    result.series.reserve(step_count(scenario.t_end, scenario.dt) + 1);
    const RunSummary summary = run_streaming(
        scenario, [&result](const Sample& s, SimPhase) {
            result.series.push_back(s);
            return true;
        });
    result.profile_start = summary.profile_start;
    result.profile_start_time = summary.profile_start_time;
    result.demag = summary.demag;

    MetricsOptions options;
    if (scenario.control_zoh) {
        options.rotation_lag = 1.0 / scenario.params.f_sw();
    }
    result.metrics = compute_metrics(result.profile_series(), scenario.params,
                                     kind_of(scenario.profile), options);
    return result;
}

SettlingResult offset_settling_time(const Scenario& scenario, double threshold_wb) {
    SettlingResult result;
    const double t0 = scenario.params.t0();
    std::vector<FluxSample> window;
    double profile_start = 0.0;
    run_streaming(scenario, [&](const Sample& s, SimPhase phase) {
        if (phase != SimPhase::Profile) {
            return true;
        }
        if (window.empty()) {
            profile_start = s.t;
        }
        const double t_local = s.t - profile_start;
        window.push_back({t_local, s.lambda_ab});
        if (t_local - window.front().t < t0) {
            return true;
        }
        result.last_offset = flux_dc_offset(window, scenario.params);
        // The closing sample opens the next window.
        window.erase(window.begin(), window.end() - 1);
        if (result.last_offset.norm() < threshold_wb) {
            result.time = t_local;
            return false;
        }
        return true;
    });
    return result;
}

Metrics compute_metrics(std::span<const Sample> series, const SystemParams& p, ProfileKind method,
                        const MetricsOptions& options) {
    Metrics m;
    m.method = method;
    if (series.empty()) {
        throw InsufficientSpan();
    }
    double peak_pcc = 0.0;
    double peak_inv = 0.0;
    for (const Sample& s : series) {
        peak_pcc = std::max(peak_pcc, s.i_pcc.max_abs());
        peak_inv = std::max(peak_inv, s.i_inv.max_abs());
    }
    m.peak_i_pcc_pu = peak_pcc / p.i_rated_peak();
    m.peak_i_inv_pu = peak_inv / p.i_rated_peak();

    std::vector<FluxSample> trajectory;
    trajectory.reserve(series.size());
    for (const Sample& s : series) {
        trajectory.push_back({s.t, s.lambda_ab});
    }
    m.flux_dc_offset = flux_dc_offset(trajectory, p);
    m.flux_dc_offset_wb = m.flux_dc_offset.norm();

    if (series.size() < 2) {
        return m;
    }
    const double t_first = series.front().t;
    const double sample_dt = series[1].t - series[0].t;
    const std::size_t lag = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(options.rotation_lag / sample_dt)));
    const double v_hat = p.v_hat();
    const double hold = 0.5 * p.t0();

    const auto steady = [&](std::size_t j) {
        const AlphaBeta v = abc_to_alphabeta(series[j].v_inv);
        if (std::fabs(v.norm() - v_hat) > options.band * v_hat) {
            return false;
        }
        const AlphaBeta ahead = abc_to_alphabeta(series[j + lag].v_inv);
        const double h = series[j + lag].t - series[j].t;
        const double phi = p.omega0() * h;
        const AlphaBeta rotated{v.alpha * std::cos(phi) - v.beta * std::sin(phi),
                                v.alpha * std::sin(phi) + v.beta * std::cos(phi)};
        return (ahead - rotated).norm() / h <= options.band * p.omega0() * v_hat;
    };

    std::optional<std::size_t> candidate;
    for (std::size_t j = 0; j + lag < series.size(); ++j) {
        if (!steady(j)) {
            candidate.reset();
            continue;
        }
        if (!candidate) {
            candidate = j;
        }
        if (series[j].t - series[*candidate].t >= hold - 1e-3 * sample_dt) {
            m.startup_time_s = series[*candidate].t - t_first;
            break;
        }
    }
    return m;
}

}  // namespace blackstart
