#pragma once

// Inverter-driven demagnetization of the transformer core and the DC
// pre-fluxing procedure used to leave a known residual flux behind.
//
// The demagnetization sequence does not need to know the residual flux:
//   1. SaturatePositive: closed-loop current references (+i_sat, 0, -i_sat)
//      drive phases a and c into saturation.
//   2. ReverseSaturate: open-loop DC (-v_d, 0, +v_d) until i_a <= -i_sat;
//      the time spent is recorded as tau.
//   3. ReturnToOrigin: (+v_d, 0, -v_d) for exactly tau / 2, which brings a
//      symmetric core back to zero flux.

#include <string_view>

#include "blackstart/frames.hpp"

namespace blackstart {

struct DemagParams {
    double i_sat = 3.0;             ///< saturation current threshold (A)
    double v_d = 10.0;              ///< DC drive voltage (V)
    double ctrl_bandwidth = 500.0;  ///< current-loop bandwidth (Hz)
    double timeout = 1.0;           ///< per-phase timeout (s)

    void validate() const;
};

enum class DemagPhase { SaturatePositive, ReverseSaturate, ReturnToOrigin, Done };

[[nodiscard]] std::string_view to_string(DemagPhase phase);

struct DemagState {
    DemagPhase phase = DemagPhase::SaturatePositive;
    double tau_measured = 0.0;      ///< duration of ReverseSaturate (s)
    double elapsed_in_phase = 0.0;  ///< s
    double return_remaining = 0.0;  ///< ReturnToOrigin time still to apply (s)
    double settled_time = 0.0;      ///< time both driven phases have been in band (s)
    ThreePhase integrator;          ///< PI integrator outputs (V)
};

/// Per-phase PI gains with output clamping.
struct CurrentLoopGains {
    double kp = 0.0;       ///< V/A
    double ki = 0.0;       ///< V/(A s)
    double v_limit = 0.0;  ///< |v| clamp (V)

    /// First-order pole placement of an R-L plant at `bandwidth_hz`:
    /// kp = wc * L, ki = wc * R.
    static CurrentLoopGains pole_placement(double bandwidth_hz, double inductance,
                                           double resistance, double v_limit);
};

struct DemagCommand {
    ThreePhase v_inv;
    DemagState next;
};

/// Band, as a fraction of i_sat, within which both phase a and c currents must
/// sit around their references before SaturatePositive hands over.
inline constexpr double kDemagSettleBand = 0.01;

/// The currents must stay in band for this many current-loop time constants.
inline constexpr double kDemagSettleTimeConstants = 5.0;

/// Dwell time implied by kDemagSettleTimeConstants and the loop bandwidth.
[[nodiscard]] double settle_dwell(const DemagParams& dp);

/// Advances the sequence by one step of length dt using the measured
/// inverter-side current, and returns the voltage command for that step.
/// Throws DemagTimeout when a phase lasts longer than dp.timeout.
[[nodiscard]] DemagCommand demag_controller(const DemagParams& dp, const CurrentLoopGains& gains,
                                            const DemagState& ds, const ThreePhase& i_inv,
                                            double dt);

/// DC pattern applied to the plant before energization to build residual flux.
struct PrefluxingConfig {
    ThreePhase pattern_v;
    double duration = 0.0;
};

/// Throws InvalidParameter for a negative or non-finite duration.
[[nodiscard]] PrefluxingConfig build_residual_flux(const ThreePhase& pattern, double duration);

}  // namespace blackstart
