#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "blackstart/demag.hpp"
#include "blackstart/errors.hpp"
#include "blackstart/sim.hpp"
#include "oracles.hpp"

using namespace blackstart;

namespace {

const SystemParams kRated = SystemParams::rated_defaults();

struct DemagTrace {
    std::vector<Sample> reverse;    // samples driven with (-v_d, 0, +v_d)
    std::vector<Sample> returning;  // samples driven with (+v_d, 0, -v_d)
    std::size_t demag_samples = 0;
    Sample first_profile;
    RunSummary summary;
};

DemagTrace trace(const Scenario& s) {
    DemagTrace t;
    const double v_d = s.demag.v_d;
    bool profile_seen = false;
    t.summary = run_streaming(s, [&](const Sample& x, SimPhase phase) {
        if (phase == SimPhase::Demag) {
            ++t.demag_samples;
            if (x.v_inv == ThreePhase{-v_d, 0.0, v_d}) {
                t.reverse.push_back(x);
            } else if (x.v_inv.a > 0.0 && x.v_inv.b == 0.0 && x.v_inv.a == -x.v_inv.c &&
                       !t.reverse.empty()) {
                t.returning.push_back(x);
            }
        } else if (phase == SimPhase::Profile && !profile_seen) {
            t.first_profile = x;
            profile_seen = true;
            return false;
        }
        return true;
    });
    return t;
}

Scenario lossless_demag(const AlphaBeta& residual) {
    Scenario s = Scenario::defaults(ProfileKind::Spiral);
    s.filter.reset();
    s.core = s.core.lossless();
    s.residual = residual;
    s.demag_first = true;
    return s;
}

}  // namespace

TEST_CASE("demag parameters") {
    const DemagParams dp;
    CHECK(dp.i_sat == 3.0);
    CHECK(dp.v_d == 10.0);
    CHECK(dp.ctrl_bandwidth == 500.0);
    CHECK(dp.timeout == 1.0);
    CHECK_NOTHROW(dp.validate());
    for (auto field : {&DemagParams::i_sat, &DemagParams::v_d, &DemagParams::ctrl_bandwidth,
                       &DemagParams::timeout}) {
        DemagParams bad;
        bad.*field = 0.0;
        CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    }
    CHECK(to_string(DemagPhase::ReverseSaturate) == "reverse_saturate");
    CHECK(to_string(DemagPhase::Done) == "done");
}

TEST_CASE("pole-placement gains") {
    const CurrentLoopGains g = CurrentLoopGains::pole_placement(500.0, 0.0378, 0.25, 350.0);
    CHECK(g.kp == approx(2 * oracle::kPi * 500.0 * 0.0378));
    CHECK(g.ki == approx(2 * oracle::kPi * 500.0 * 0.25));
    CHECK(g.v_limit == 350.0);
    CHECK(settle_dwell(DemagParams{}) == approx(5.0 / (2 * oracle::kPi * 500.0)));
}

TEST_CASE("state machine transitions") {
    const DemagParams dp;
    const CurrentLoopGains g = CurrentLoopGains::pole_placement(dp.ctrl_bandwidth, 0.04, 0.25, 350.0);
    const double dt = 1e-5;
    DemagState ds;

    SUBCASE("current loop saturates at the clamp") {
        const DemagCommand cmd = demag_controller(dp, g, ds, {-100.0, 0.0, 100.0}, dt);
        CHECK(cmd.v_inv.a == 350.0);
        CHECK(cmd.v_inv.c == -350.0);
        CHECK(cmd.next.integrator.a == 0.0);
        CHECK(cmd.next.phase == DemagPhase::SaturatePositive);
    }

    SUBCASE("full sequence") {
        const ThreePhase at_ref{dp.i_sat, 0.0, -dp.i_sat};
        // Off-reference currents reset the dwell.
        ds = demag_controller(dp, g, ds, {2.5, 0.0, -2.5}, dt).next;
        CHECK(ds.settled_time == 0.0);
        int steps = 0;
        while (ds.phase == DemagPhase::SaturatePositive) {
            ds = demag_controller(dp, g, ds, at_ref, dt).next;
            ++steps;
        }
        CHECK(steps * dt == approx(settle_dwell(dp)).epsilon(dt / settle_dwell(dp) + 1e-9));
        CHECK(ds.phase == DemagPhase::ReverseSaturate);

        // The hand-over step already applies the reverse pattern; 36 more
        // while the a-phase current stays above -i_sat.
        DemagCommand cmd{};
        for (int k = 0; k < 36; ++k) {
            cmd = demag_controller(dp, g, ds, {0.0, 0.0, 0.0}, dt);
            CHECK(cmd.v_inv == ThreePhase{-dp.v_d, 0.0, dp.v_d});
            ds = cmd.next;
        }
        CHECK(ds.tau_measured == approx(37 * dt));

        cmd = demag_controller(dp, g, ds, {-dp.i_sat, 0.0, dp.i_sat}, dt);
        CHECK(cmd.next.phase == DemagPhase::ReturnToOrigin);
        CHECK(cmd.v_inv == ThreePhase{dp.v_d, 0.0, -dp.v_d});
        ds = cmd.next;

        // 18.5 steps of return: 18 full steps and a half-scaled last one.
        double volt_seconds = cmd.v_inv.a * dt;
        while (true) {
            cmd = demag_controller(dp, g, ds, {}, dt);
            ds = cmd.next;
            if (ds.phase == DemagPhase::Done) {
                break;
            }
            volt_seconds += cmd.v_inv.a * dt;
        }
        CHECK(volt_seconds == approx(dp.v_d * 37 * dt / 2));
        CHECK(cmd.v_inv == ThreePhase{});
    }

    SUBCASE("timeout") {
        DemagParams quick = dp;
        quick.timeout = 1e-3;
        CHECK_THROWS_WITH_AS(
            [&] {
                for (int k = 0; k < 1000; ++k) {
                    ds = demag_controller(quick, g, ds, {}, dt).next;
                }
            }(),
            "demag failed to converge", DemagTimeout);
    }
}

TEST_CASE("reverse-saturate time equals flux swing over drive voltage") {
    const Scenario s = lossless_demag({0.4, -0.3});
    const DemagTrace t = trace(s);
    REQUIRE(t.summary.demag.has_value());
    REQUIRE(t.reverse.size() > 2);
    REQUIRE_FALSE(t.returning.empty());

    // Flux at the first reverse sample and at the first return sample.
    const double swing = t.reverse.front().lambda.a - t.returning.front().lambda.a;
    const double tau = t.summary.demag->tau_measured;
    CHECK(tau == approx(swing / s.demag.v_d).epsilon(1e-9));
    CHECK(tau == approx(t.reverse.size() * s.dt).epsilon(1e-9));
}

TEST_CASE("return phase lasts half the measured time and lands at the origin") {
    const Scenario s = lossless_demag({-0.5, 0.6});
    const DemagTrace t = trace(s);
    REQUIRE(t.summary.demag.has_value());
    const double tau = t.summary.demag->tau_measured;
    CHECK(std::abs(t.returning.size() * s.dt - tau / 2) <= s.dt);
    const double l0 = kRated.lambda0();
    CHECK(std::abs(t.first_profile.lambda.a) < 0.02 * l0);
    CHECK(t.first_profile.lambda.max_abs() < 0.05 * l0);
    CHECK(t.summary.demag->duration == approx(t.demag_samples * s.dt));
}

TEST_CASE("a-phase current falls monotonically while reverse saturating") {
    const DemagTrace t = trace(lossless_demag({0.2, 0.5}));
    REQUIRE(t.reverse.size() > 2);
    for (std::size_t k = 1; k < t.reverse.size(); ++k) {
        CHECK(t.reverse[k].i_inv.a <= t.reverse[k - 1].i_inv.a + 1e-12);
    }
}

TEST_CASE("demag with losses and filter clears random residuals") {
    std::mt19937_64 rng(2024);
    const double knee = CoreParams::defaults(kRated).lambda_knee;
    const double l0 = kRated.lambda0();
    for (int i = 0; i < 6; ++i) {
        const oracle::Vec2 r = i == 0 ? oracle::Vec2{} : oracle::uniform_disk(rng, knee);
        Scenario s = Scenario::defaults(ProfileKind::Spiral);
        s.residual = {r.x, r.y};
        s.demag_first = true;
        const DemagTrace t = trace(s);
        CAPTURE(r.x);
        CAPTURE(r.y);
        CHECK(t.first_profile.lambda.max_abs() < 0.05 * l0);
    }
}

TEST_CASE("demag timeout propagates from a run") {
    Scenario s = lossless_demag({0.3, 0.0});
    s.demag.timeout = 5e-3;
    CHECK_THROWS_AS((void)run(s), DemagTimeout);
}

TEST_CASE("residual flux establishment") {
    CHECK_THROWS_AS((void)build_residual_flux({10.0, 0.0, -10.0}, -1.0), InvalidParameter);
    CHECK_THROWS_AS((void)build_residual_flux({NAN, 0.0, 0.0}, 1.0), InvalidParameter);
    const PrefluxingConfig c = build_residual_flux({10.0, 0.0, -10.0}, 0.05);
    CHECK(c.pattern_v == ThreePhase{10.0, 0.0, -10.0});
    CHECK(c.duration == 0.05);

    // Drive phase a to the knee; the remaining flux is close to the Clarke
    // image of (knee, 0, -knee), short of it by the resistive droop.
    const CoreParams core = CoreParams::defaults(kRated);
    Scenario s = Scenario::defaults(ProfileKind::Off);
    s.prefluxing = build_residual_flux({10.0, 0.0, -10.0}, core.lambda_knee / 10.0);
    const SimResult r = run(s);
    const AlphaBeta residual = r.series[r.profile_start].lambda_ab;
    const oracle::Vec2 ideal = oracle::clarke(core.lambda_knee, 0.0, -core.lambda_knee);
    CHECK(residual.alpha == approx(ideal.x).epsilon(0.02));
    CHECK(residual.beta == approx(ideal.y).epsilon(0.02));
    CHECK(residual.alpha < ideal.x);
}
