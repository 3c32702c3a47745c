#include "blackstart/demag.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blackstart/errors.hpp"

namespace blackstart {

namespace {

struct PiOutput {
    double v;
    double integrator;
};

// Clamped PI; the integrator is frozen while the output is saturated.
PiOutput pi_update(const CurrentLoopGains& g, double error, double integrator, double dt) {
    const double unclamped = g.kp * error + integrator;
    if (std::fabs(unclamped) >= g.v_limit) {
        return {std::clamp(unclamped, -g.v_limit, g.v_limit), integrator};
    }
    const double next = integrator + g.ki * error * dt;
    return {std::clamp(g.kp * error + next, -g.v_limit, g.v_limit), next};
}

}  // namespace

void DemagParams::validate() const {
    if (!(i_sat > 0.0) || !(v_d > 0.0) || !(timeout > 0.0) || !(ctrl_bandwidth > 0.0)) {
        throw InvalidParameter("demag: i_sat, v_d, ctrl_bandwidth and timeout must be positive");
    }
}

std::string_view to_string(DemagPhase phase) {
    switch (phase) {
        case DemagPhase::SaturatePositive:
            return "saturate_positive";
        case DemagPhase::ReverseSaturate:
            return "reverse_saturate";
        case DemagPhase::ReturnToOrigin:
            return "return_to_origin";
        case DemagPhase::Done:
            return "done";
    }
    return "unknown";
}

double settle_dwell(const DemagParams& dp) {
    return kDemagSettleTimeConstants / (2.0 * std::numbers::pi * dp.ctrl_bandwidth);
}

CurrentLoopGains CurrentLoopGains::pole_placement(double bandwidth_hz, double inductance,
                                                  double resistance, double v_limit) {
    const double wc = 2.0 * std::numbers::pi * bandwidth_hz;
    return {wc * inductance, wc * resistance, v_limit};
}

DemagCommand demag_controller(const DemagParams& dp, const CurrentLoopGains& gains,
                              const DemagState& ds, const ThreePhase& i_inv, double dt) {
    DemagState next = ds;
    const auto enter = [&next](DemagPhase phase) {
        next.phase = phase;
        next.elapsed_in_phase = 0.0;
    };
    const ThreePhase forward{dp.v_d, 0.0, -dp.v_d};

    if (next.phase == DemagPhase::SaturatePositive) {
        // Phase b carries no usable flux information, so the hand-over waits for
        // both driven phases to settle; zero-sum flux then pins phase b at zero.
        const double band = kDemagSettleBand * dp.i_sat;
        const bool settled =
            std::fabs(i_inv.a - dp.i_sat) <= band && std::fabs(i_inv.c + dp.i_sat) <= band;
        next.settled_time = settled ? next.settled_time + dt : 0.0;
        if (next.settled_time >= settle_dwell(dp)) {
            enter(DemagPhase::ReverseSaturate);
            next.tau_measured = 0.0;
        }
    }
    if (next.phase == DemagPhase::ReverseSaturate && i_inv.a <= -dp.i_sat) {
        enter(DemagPhase::ReturnToOrigin);
        next.return_remaining = 0.5 * next.tau_measured;
    }
    if (next.phase == DemagPhase::ReturnToOrigin && next.return_remaining <= 0.0) {
        enter(DemagPhase::Done);
    }

    ThreePhase v;
    switch (next.phase) {
        case DemagPhase::SaturatePositive: {
            const ThreePhase reference{dp.i_sat, 0.0, -dp.i_sat};
            const ThreePhase error = reference - i_inv;
            const PiOutput a = pi_update(gains, error.a, next.integrator.a, dt);
            const PiOutput b = pi_update(gains, error.b, next.integrator.b, dt);
            const PiOutput c = pi_update(gains, error.c, next.integrator.c, dt);
            v = {a.v, b.v, c.v};
            next.integrator = {a.integrator, b.integrator, c.integrator};
            break;
        }
        case DemagPhase::ReverseSaturate:
            v = -1.0 * forward;
            next.tau_measured += dt;
            break;
        case DemagPhase::ReturnToOrigin: {
            // The last step is scaled so the applied volt-seconds equal v_d * tau / 2.
            const double applied = std::min(dt, next.return_remaining);
            v = forward * (applied / dt);
            next.return_remaining -= applied;
            break;
        }
        case DemagPhase::Done:
            break;
    }

    next.elapsed_in_phase += dt;
    if (next.phase != DemagPhase::Done && next.elapsed_in_phase > dp.timeout) {
        throw DemagTimeout();
    }
    return {v, next};
}

PrefluxingConfig build_residual_flux(const ThreePhase& pattern, double duration) {
    if (!(duration >= 0.0) || !std::isfinite(duration) || !pattern.is_finite()) {
        throw InvalidParameter("prefluxing duration must be finite and non-negative");
    }
    return {pattern, duration};
}

}  // namespace blackstart
