#include "blackstart/transformer.hpp"

#include <cmath>

#include "blackstart/errors.hpp"

namespace blackstart {

CoreParams CoreParams::defaults(const SystemParams& p) {
    CoreParams core;
    core.lambda_knee = 1.15 * p.lambda0();
    core.l_mag = 4.3;
    core.l_sat = core.l_mag / 125.0;
    core.r_core = 2000.0;
    core.r_wind = 0.25;
    return core;
}

CoreParams CoreParams::lossless() const {
    CoreParams core = *this;
    core.r_wind = 0.0;
    core.r_core = 1e9;
    return core;
}

void CoreParams::validate() const {
    if (!(lambda_knee > 0.0) || !std::isfinite(lambda_knee)) {
        throw InvalidParameter("core: lambda_knee must be positive");
    }
    if (!(l_sat > 0.0) || !(l_sat < l_mag) || !std::isfinite(l_mag)) {
        throw InvalidParameter("core: require 0 < l_sat < l_mag");
    }
    if (!(r_core > 0.0)) {
        throw InvalidParameter("core: r_core must be positive");
    }
    if (!(r_wind >= 0.0) || !std::isfinite(r_wind)) {
        throw InvalidParameter("core: r_wind must be non-negative");
    }
}

double magnetizing_current(const CoreParams& core, double lambda) {
    const double magnitude = std::fabs(lambda);
    if (magnitude <= core.lambda_knee) {
        return lambda / core.l_mag;
    }
    const double i = core.lambda_knee / core.l_mag + (magnitude - core.lambda_knee) / core.l_sat;
    return std::copysign(i, lambda);
}

ThreePhase magnetizing_current(const CoreParams& core, const ThreePhase& lambda) {
    return {magnetizing_current(core, lambda.a), magnetizing_current(core, lambda.b),
            magnetizing_current(core, lambda.c)};
}

ThreePhase terminal_current(const CoreParams& core, const TransformerState& state,
                            const ThreePhase& v_pcc) {
    return magnetizing_current(core, state.lambda) + v_pcc / core.r_core;
}

TransformerDerivative state_derivative(const CoreParams& core, const TransformerState& state,
                                       const ThreePhase& v_pcc) {
    const ThreePhase i_pcc = terminal_current(core, state, v_pcc);
    // A three-limb core carries no zero-sequence flux.
    return {(v_pcc - core.r_wind * i_pcc).without_zero_sequence(), i_pcc};
}

TransformerState set_residual_flux(TransformerState state, const AlphaBeta& residual,
                                   const SystemParams& p) {
    if (!residual.is_finite() || residual.norm() > 1.5 * p.lambda0()) {
        throw InvalidParameter("unphysical residual flux");
    }
    state.lambda = alphabeta_to_abc(residual);
    return state;
}

}  // namespace blackstart
