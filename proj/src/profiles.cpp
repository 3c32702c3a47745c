#include "blackstart/profiles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "blackstart/errors.hpp"

namespace blackstart {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

AlphaBeta polar(double magnitude, double angle) {
    return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

// Flux gained by a rated vector rotating from angle phi0 for tau seconds.
AlphaBeta rotating_flux(const SystemParams& p, double phi0, double tau) {
    const double phi = phi0 + p.omega0() * tau;
    return p.lambda0() * AlphaBeta{std::sin(phi) - std::sin(phi0), std::cos(phi0) - std::cos(phi)};
}

}  // namespace

SystemParams::SystemParams(double v_ll_rms, double f0, double s_rated, double v_dc,
                           double i_rated_peak, double f_sw)
    : v_ll_rms_(v_ll_rms),
      f0_(f0),
      v_hat_(v_ll_rms * std::numbers::sqrt2 / std::numbers::sqrt3),
      omega0_(kTwoPi * f0),
      s_rated_(s_rated),
      v_dc_(v_dc),
      i_rated_peak_(i_rated_peak),
      f_sw_(f_sw) {
    for (const double v : {v_ll_rms, f0, s_rated, v_dc, i_rated_peak, f_sw}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidParameter("system parameters must be positive and finite");
        }
    }
    // The commanded line-to-line peak must fit within the DC link.
    if (v_hat_ * std::numbers::sqrt3 > v_dc_) {
        throw InvalidParameter("rated line-to-line peak voltage exceeds the DC-link voltage");
    }
}

SystemParams SystemParams::rated_defaults() {
    return SystemParams(400.0, 60.0, 5000.0, 700.0, 10.2, 8000.0);
}

MagnetizationProfile make_profile(ProfileKind kind, const SystemParams& p) {
    switch (kind) {
        case ProfileKind::Hard:
            return profile::Hard{};
        case ProfileKind::UltraFast:
            return profile::UltraFast{1.0 / p.omega0()};
        case ProfileKind::Spiral:
            return profile::Spiral{p.v_hat() / kTwoPi, 1.0, p.t0()};
        case ProfileKind::Off:
            return profile::Off{};
    }
    throw InvalidParameter("unknown profile kind");
}

ProfileKind kind_of(const MagnetizationProfile& profile) {
    return std::visit(Overloaded{[](const profile::Hard&) { return ProfileKind::Hard; },
                                 [](const profile::UltraFast&) { return ProfileKind::UltraFast; },
                                 [](const profile::Spiral&) { return ProfileKind::Spiral; },
                                 [](const profile::Off&) { return ProfileKind::Off; }},
                      profile);
}

std::string_view to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::Hard:
            return "hard";
        case ProfileKind::UltraFast:
            return "ultrafast";
        case ProfileKind::Spiral:
            return "spiral";
        case ProfileKind::Off:
            return "off";
    }
    return "unknown";
}

ProfileKind parse_profile_kind(std::string_view name) {
    for (const auto kind :
         {ProfileKind::Hard, ProfileKind::UltraFast, ProfileKind::Spiral, ProfileKind::Off}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw InvalidParameter("unknown profile \"" + std::string(name) + "\"");
}

double design_startup_time(const MagnetizationProfile& profile) {
    return std::visit(Overloaded{[](const profile::UltraFast& u) { return u.t_d; },
                                 [](const profile::Spiral& s) { return s.t_a; },
                                 [](const auto&) { return 0.0; }},
                      profile);
}

AlphaBeta hard_voltage(const SystemParams& p, double t) {
    return profile_voltage(profile::Hard{}, p, t);
}

AlphaBeta ultrafast_voltage(const SystemParams& p, double t) {
    return profile_voltage(make_profile(ProfileKind::UltraFast, p), p, t);
}

AlphaBeta spiral_voltage(const SystemParams& p, double t) {
    return profile_voltage(make_profile(ProfileKind::Spiral, p), p, t);
}

AlphaBeta profile_voltage(const MagnetizationProfile& profile, const SystemParams& p, double t) {
    const double w = p.omega0();
    return std::visit(
        Overloaded{
            [&](const profile::Hard&) { return polar(p.v_hat(), w * t); },
            [&](const profile::UltraFast& u) {
                // Phase held at 0 until t_d, then the integrator restarts from pi/2.
                if (t < u.t_d) {
                    return AlphaBeta{p.v_hat(), 0.0};
                }
                return polar(p.v_hat(), std::numbers::pi / 2.0 + w * (t - u.t_d));
            },
            [&](const profile::Spiral& s) {
                if (t <= s.t_a) {
                    return polar(s.a * w * t, s.b * w * t);
                }
                return polar(p.v_hat(), s.b * w * s.t_a + w * (t - s.t_a));
            },
            [](const profile::Off&) { return AlphaBeta{}; }},
        profile);
}

AlphaBeta analytic_flux(const MagnetizationProfile& profile, const SystemParams& p, double t) {
    const double w = p.omega0();
    return std::visit(
        Overloaded{
            [&](const profile::Hard&) { return rotating_flux(p, 0.0, t); },
            [&](const profile::UltraFast& u) {
                if (t <= u.t_d) {
                    return AlphaBeta{p.v_hat() * t, 0.0};
                }
                return AlphaBeta{p.v_hat() * u.t_d, 0.0} +
                       rotating_flux(p, std::numbers::pi / 2.0, t - u.t_d);
            },
            [&](const profile::Spiral& s) {
                // Antiderivatives of a*w*t*cos(b*w*t) and a*w*t*sin(b*w*t).
                const auto ramp_flux = [&](double tau) {
                    const double bw = s.b * w;
                    const double sn = std::sin(bw * tau);
                    const double cs = std::cos(bw * tau);
                    return AlphaBeta{s.a * w * (tau * sn / bw + (cs - 1.0) / (bw * bw)),
                                     s.a * w * (-tau * cs / bw + sn / (bw * bw))};
                };
                if (t <= s.t_a) {
                    return ramp_flux(t);
                }
                return ramp_flux(s.t_a) + rotating_flux(p, s.b * w * s.t_a, t - s.t_a);
            },
            [](const profile::Off&) { return AlphaBeta{}; }},
        profile);
}

AlphaBeta flux_dc_offset(std::span<const FluxSample> trajectory, const SystemParams& p) {
    if (trajectory.size() < 2) {
        throw InsufficientSpan();
    }
    const double t_end = trajectory.back().t;
    const double t_start = t_end - p.t0();
    // Small slack absorbs rounding of t accumulated on a uniform grid.
    if (trajectory.front().t > t_start + 1e-12 * p.t0()) {
        throw InsufficientSpan();
    }

    AlphaBeta area;
    for (std::size_t k = trajectory.size() - 1; k > 0; --k) {
        const FluxSample& hi = trajectory[k];
        const FluxSample& lo = trajectory[k - 1];
        if (hi.t <= t_start) {
            break;
        }
        FluxSample left = lo;
        if (lo.t < t_start) {
            const double w = (t_start - lo.t) / (hi.t - lo.t);
            left = {t_start, lo.flux + w * (hi.flux - lo.flux)};
        }
        area += 0.5 * (hi.t - left.t) * (hi.flux + left.flux);
    }
    return area / p.t0();
}

}  // namespace blackstart
