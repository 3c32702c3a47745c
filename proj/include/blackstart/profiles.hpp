#pragma once

// Rated system quantities and the inverter EMF reference profiles used to
// energize the transformer, together with their closed-form flux integrals.

#include <span>
#include <string_view>
#include <variant>

#include "blackstart/frames.hpp"

namespace blackstart {

/// Rated electrical quantities of the converter.
///
/// Only the independent ratings are stored; peak phase voltage, angular
/// frequency and rated flux are derived so that lambda0 * omega0 == v_hat
/// holds by construction.
class SystemParams {
public:
    /// @param v_ll_rms line-to-line RMS voltage (V)
    /// @param f0 rated frequency (Hz)
    SystemParams(double v_ll_rms, double f0, double s_rated, double v_dc, double i_rated_peak,
                 double f_sw);

    /// 5 kVA, 400 V(ll,rms), 60 Hz, 700 V DC link, 10.2 A peak, 8 kHz.
    static SystemParams rated_defaults();

    [[nodiscard]] double v_ll_rms() const { return v_ll_rms_; }
    [[nodiscard]] double v_hat() const { return v_hat_; }
    [[nodiscard]] double omega0() const { return omega0_; }
    [[nodiscard]] double f0() const { return f0_; }
    [[nodiscard]] double t0() const { return 1.0 / f0_; }
    [[nodiscard]] double lambda0() const { return v_hat_ / omega0_; }
    [[nodiscard]] double s_rated() const { return s_rated_; }
    [[nodiscard]] double v_dc() const { return v_dc_; }
    [[nodiscard]] double i_rated_peak() const { return i_rated_peak_; }
    [[nodiscard]] double f_sw() const { return f_sw_; }

private:
    double v_ll_rms_;
    double f0_;
    double v_hat_;
    double omega0_;
    double s_rated_;
    double v_dc_;
    double i_rated_peak_;
    double f_sw_;
};

namespace profile {

/// Full rated rotating voltage from t = 0.
struct Hard {};

/// Rated-magnitude vector held on the alpha axis for t_d, then rotating
/// from +90 degrees.
struct UltraFast {
    double t_d = 0.0;
};

/// Archimedean spiral: magnitude a * omega0 * t, angle b * omega0 * t, up to
/// t_a; rated rotation afterwards.
struct Spiral {
    double a = 0.0;
    double b = 1.0;
    double t_a = 0.0;
};

/// Zero output.
struct Off {};

}  // namespace profile

using MagnetizationProfile =
    std::variant<profile::Hard, profile::UltraFast, profile::Spiral, profile::Off>;

enum class ProfileKind { Hard, UltraFast, Spiral, Off };

/// Builds the profile of the requested kind with the timing constants fixed
/// by the system ratings (t_d = T0 / 2pi; a = V / 2pi, b = 1, t_a = T0).
[[nodiscard]] MagnetizationProfile make_profile(ProfileKind kind, const SystemParams& p);

[[nodiscard]] ProfileKind kind_of(const MagnetizationProfile& profile);
[[nodiscard]] std::string_view to_string(ProfileKind kind);
/// Accepts "hard", "ultrafast", "spiral" and "off"; throws InvalidParameter.
[[nodiscard]] ProfileKind parse_profile_kind(std::string_view name);

/// Time at which the profile reaches its rated rotating steady state.
[[nodiscard]] double design_startup_time(const MagnetizationProfile& profile);

[[nodiscard]] AlphaBeta hard_voltage(const SystemParams& p, double t);
[[nodiscard]] AlphaBeta ultrafast_voltage(const SystemParams& p, double t);
[[nodiscard]] AlphaBeta spiral_voltage(const SystemParams& p, double t);

/// EMF reference of any profile at profile-local time t.
[[nodiscard]] AlphaBeta profile_voltage(const MagnetizationProfile& profile,
                                        const SystemParams& p, double t);

/// Exact integral of profile_voltage from 0 to t (resistance-free flux).
[[nodiscard]] AlphaBeta analytic_flux(const MagnetizationProfile& profile, const SystemParams& p,
                                      double t);

struct FluxSample {
    double t = 0.0;
    AlphaBeta flux;
};

/// Time-weighted mean of the flux vector over the trailing fundamental
/// period of a uniformly or non-uniformly sampled trajectory. Throws
/// InsufficientSpan when the trajectory is shorter than T0.
[[nodiscard]] AlphaBeta flux_dc_offset(std::span<const FluxSample> trajectory,
                                       const SystemParams& p);

}  // namespace blackstart
