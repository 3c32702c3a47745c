#pragma once

// Three-phase three-limb saturable transformer seen from the fed winding,
// with the other winding open. The core follows a single-valued
// piecewise-linear magnetization curve; residual flux enters only as an
// initial condition.

#include "blackstart/frames.hpp"
#include "blackstart/profiles.hpp"

namespace blackstart {

struct CoreParams {
    double lambda_knee = 0.0;  ///< knee flux linkage (Wb)
    double l_mag = 0.0;        ///< unsaturated magnetizing inductance (H)
    double l_sat = 0.0;        ///< saturated incremental inductance (H)
    double r_core = 0.0;       ///< parallel core-loss resistance (ohm), may be +inf
    double r_wind = 0.0;       ///< series winding resistance (ohm)

    /// Calibrated defaults for the rated system: knee at 1.15 lambda0,
    /// 4.3 H unsaturated, 34.4 mH saturated, 2 kohm core loss, 0.25 ohm winding.
    static CoreParams defaults(const SystemParams& p);

    /// Same curve with r_wind = 0 and r_core = 1e9 ohm.
    [[nodiscard]] CoreParams lossless() const;

    /// Throws InvalidParameter unless 0 < l_sat < l_mag, lambda_knee > 0,
    /// r_core > 0 and r_wind >= 0.
    void validate() const;
};

struct TransformerState {
    ThreePhase lambda;  ///< per-phase flux linkage (Wb); sums to zero
};

struct TransformerDerivative {
    ThreePhase dlambda_dt;  ///< Wb/s, zero-sum
    ThreePhase i_pcc;       ///< terminal current (A)
};

/// Odd, continuous, monotone piecewise-linear magnetization curve.
[[nodiscard]] double magnetizing_current(const CoreParams& core, double lambda);
[[nodiscard]] ThreePhase magnetizing_current(const CoreParams& core, const ThreePhase& lambda);

/// Terminal current and flux derivative for a terminal voltage v_pcc.
[[nodiscard]] TransformerDerivative state_derivative(const CoreParams& core,
                                                     const TransformerState& state,
                                                     const ThreePhase& v_pcc);

/// Terminal current only (same expression as in state_derivative).
[[nodiscard]] ThreePhase terminal_current(const CoreParams& core, const TransformerState& state,
                                          const ThreePhase& v_pcc);

/// Replaces the flux with the inverse-Clarke image of `residual`. Throws
/// InvalidParameter("unphysical residual flux") when |residual| > 1.5 lambda0.
[[nodiscard]] TransformerState set_residual_flux(TransformerState state, const AlphaBeta& residual,
                                                 const SystemParams& p);

}  // namespace blackstart
