#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tunnelscatter/channel.hpp"
#include "tunnelscatter/device.hpp"
#include "tunnelscatter/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace tunnelscatter;
using namespace tunnelscatter::device;
using Catch::Approx;

TEST_CASE("iv_current interpolates the default curve", "[device][iv]") {
    const auto curve = IVCurve::default_curve();
    CHECK(iv_current(curve, 0.095) == Approx(0.60e-3).epsilon(1e-12));
    CHECK(iv_current(curve, 0.0) == 0.0);
    CHECK(iv_current(curve, 0.150) == Approx(0.408e-3).epsilon(1e-12));
    // midpoint of the rising segment
    CHECK(iv_current(curve, 0.0325) == Approx(0.5e-3).epsilon(1e-12));
}

TEST_CASE("iv_current rejects voltages off the curve", "[device][iv]") {
    const auto curve = IVCurve::default_curve();
    CHECK_THROWS_AS(iv_current(curve, -0.001), DomainError);
    CHECK_THROWS_AS(iv_current(curve, 0.551), DomainError);
    CHECK_THROWS_AS(iv_current(curve, std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("IVCurve constructor enforces ordering and sign", "[device][iv]") {
    CHECK_THROWS_AS(IVCurve({{0.0, 0.0}}), ConfigurationError);
    CHECK_THROWS_AS(IVCurve({{0.0, 0.0}, {0.0, 1e-3}}), ConfigurationError);
    CHECK_THROWS_AS(IVCurve({{0.1, 0.0}, {0.05, 1e-3}}), ConfigurationError);
    CHECK_THROWS_AS(IVCurve({{0.0, 0.0}, {0.1, -1e-3}}), ConfigurationError);
}

TEST_CASE("negative resistance of the default region", "[device][resistance]") {
    const auto curve = IVCurve::default_curve();
    const double r = negative_resistance(curve, RegionOfInterest{});
    CHECK(r == Approx(oracle::chord_resistance(0.095, 0.60e-3, 0.150, 0.408e-3)).epsilon(1e-12));
    CHECK(r == Approx(-286.5).margin(0.1));
    CHECK(r >= -293.0);
    CHECK(r <= -281.0);
}

TEST_CASE("negative resistance of a unit-slope curve", "[device][resistance]") {
    const IVCurve curve({{0.0, 2.0}, {1.0, 1.0}});
    CHECK(negative_resistance(curve, RegionOfInterest{0.0, 1.0}) == Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("negative resistance rejects a rising region", "[device][resistance]") {
    const auto curve = IVCurve::default_curve();
    CHECK_THROWS_AS(negative_resistance(curve, RegionOfInterest{0.0, 0.065}), InvalidRegionError);
    // straddles the peak: rises then falls
    CHECK_THROWS_AS(negative_resistance(curve, RegionOfInterest{0.03, 0.1}), InvalidRegionError);
    CHECK_THROWS_AS(negative_resistance(curve, RegionOfInterest{0.15, 0.095}), ConfigurationError);
}

TEST_CASE("iv_current strictly decreasing over the region", "[device][iv][property]") {
    const auto curve = IVCurve::default_curve();
    double prev = iv_current(curve, 0.095);
    for (int mv = 96; mv <= 150; ++mv) {
        const double i = iv_current(curve, mv * 1e-3);
        CHECK(i < prev);
        prev = i;
    }
}

TEST_CASE("bias power at the operating points", "[device][power]") {
    const auto curve = IVCurve::default_curve();
    CHECK(bias_power(curve, 0.095) == Approx(57.0e-6).epsilon(0.01));
    CHECK(bias_power(curve, 0.0) == 0.0);
    CHECK(bias_power(curve, 0.150) == Approx(0.150 * 0.408e-3).epsilon(1e-12));
    CHECK(bias_power(curve, 0.150) == Approx(61.2e-6).epsilon(1e-9));
}

TEST_CASE("oscillator frequency is affine in bias", "[device][oscillator]") {
    OscillatorModel m;
    CHECK(oscillator_frequency(m, m.v_ref) == 867.4e6);
    CHECK(oscillator_frequency(m, m.v_ref + 0.010) == Approx(867.45e6).epsilon(1e-15));
    CHECK_THROWS_AS(oscillator_frequency(m, 0.050), NotOscillatingError);
    CHECK_THROWS_AS(oscillator_frequency(m, 0.151), NotOscillatingError);

    for (double v1 = 0.095; v1 <= 0.120; v1 += 0.001) {
        const double v3 = v1 + 0.030;
        const double v2 = 0.5 * (v1 + v3);
        CHECK(oscillator_frequency(m, v1) + oscillator_frequency(m, v3) ==
              Approx(2.0 * oscillator_frequency(m, v2)).margin(1e-6));
    }
}

TEST_CASE("oscillator frequency includes the drift offset", "[device][oscillator]") {
    OscillatorModel m;
    m.drift.current_offset_hz = 12.5e3;
    CHECK(oscillator_frequency(m, m.v_ref) == 867.4e6 + 12.5e3);
}

TEST_CASE("step_drift is reproducible under a seed", "[device][drift]") {
    DriftProcess p;
    Rng a(42), b(42);
    const auto x = step_drift(p, 6.0, a);
    const auto y = step_drift(p, 6.0, b);
    CHECK(x.current_offset_hz == y.current_offset_hz);
    CHECK(x.current_offset_hz != 0.0);
    CHECK_THROWS_AS(step_drift(p, 0.0, a), DomainError);
}

TEST_CASE("step_drift with zero variance stays at zero", "[device][drift]") {
    DriftProcess p{0.0, 3600.0, 0.0};
    Rng rng(7);
    for (int k = 0; k < 1000; ++k) p = step_drift(p, 6.0, rng);
    CHECK(p.current_offset_hz == 0.0);
}

TEST_CASE("step_drift ensemble reaches the stationary spread", "[device][drift][montecarlo]") {
    const int runs = 200;
    std::vector<double> finals;
    for (int r = 0; r < runs; ++r) {
        Rng rng(derive_seed(2024, r));
        DriftProcess p;
        for (int k = 0; k < 3600; ++k) p = step_drift(p, 6.0, rng);
        finals.push_back(p.current_offset_hz);
    }
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= runs;
    double var = 0.0;
    for (double f : finals) var += (f - mean) * (f - mean);
    const double sd = std::sqrt(var / (runs - 1));
    // OU variance after T from zero: s^2 (1 - exp(-2T/tau)), T = 6 h, tau = 1 h.
    const double expected = 1.9e4 * std::sqrt(1.0 - std::exp(-2.0 * 21600.0 / 3600.0));
    CHECK(sd == Approx(expected).epsilon(0.2));
}

TEST_CASE("injection lock range follows the Adler scaling", "[device][lock]") {
    ReflectionAmpModel amp;
    CHECK(injection_lock_range(amp, -19.0) == Approx(8.674e6).epsilon(1e-12));
    CHECK(injection_lock_range(amp, -39.0) == Approx(8.674e5).epsilon(1e-12));
    CHECK(injection_lock_range(amp, -std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(injection_lock_range(amp, -58.2) ==
          Approx(oracle::adler_half_width(867.4e6, 50.0, std::pow(10.0, -5.82) * 1e-3,
                                          std::pow(10.0, -1.9) * 1e-3))
              .epsilon(1e-12));

    double prev = 0.0;
    for (double p = -120.0; p <= 0.0; p += 0.5) {
        const double r = injection_lock_range(amp, p);
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("reflect compresses at saturation", "[device][reflect]") {
    ReflectionAmpModel amp;
    auto r = reflect(amp, -58.2, 0.0);
    CHECK(r.locked);
    CHECK(r.p_out_dbm == -41.0);

    r = reflect(amp, -90.0, 0.0);
    CHECK(r.locked);
    CHECK(r.p_out_dbm == Approx(-55.0).margin(1e-12));

    r = reflect(amp, -58.2, 10e6);
    CHECK_FALSE(r.locked);
    CHECK(injection_lock_range(amp, -58.2) == Approx(95e3).epsilon(0.05));
}

TEST_CASE("reflect invariants over locked inputs", "[device][reflect][property]") {
    ReflectionAmpModel amp;
    double prev_gain = std::numeric_limits<double>::infinity();
    for (double p = -120.0; p <= 0.0; p += 0.25) {
        const auto r = reflect(amp, p, 1.0e3);
        if (!r.locked) continue;
        CHECK(r.p_out_dbm <= amp.p_sat_dbm);
        const double gain = r.p_out_dbm - p;
        CHECK(gain <= prev_gain);
        prev_gain = gain;
        // locked: output sits at the injected frequency
        CHECK(r.output_offset_hz == 1.0e3);
    }
}

TEST_CASE("conventional reflector subtracts the switch loss", "[device][reflect]") {
    CHECK(conventional_reflect(-30.0, 6.0) == -36.0);
    CHECK(conventional_reflect(-35.0, 6.0) == -41.0);
    CHECK(conventional_reflect(-35.0) == reflect(ReflectionAmpModel{}, -35.0, 0.0).p_out_dbm);
    CHECK(conventional_reflect(0.0, 0.0) == 0.0);
}

TEST_CASE("switchover ordering at the extremes", "[device][reflect][property]") {
    ReflectionAmpModel amp;
    for (double p = -30.0; p <= 0.0; p += 0.5) {
        CHECK(conventional_reflect(p, 6.0) >= reflect(amp, p, 0.0).p_out_dbm);
    }
    for (double p = -100.0; p <= -40.0; p += 0.5) {
        CHECK(reflect(amp, p, 0.0).p_out_dbm >= conventional_reflect(p, 6.0));
    }
}

TEST_CASE("envelope detector latches with hysteresis", "[device][detector]") {
    EnvelopeDetectorModel det;
    auto [s1, strong1] = envelope_detect(det, -35.0);
    CHECK(strong1);
    auto [s2, strong2] = envelope_detect(s1, -41.0);
    CHECK(strong2);
    auto [s3, strong3] = envelope_detect(s2, -50.0);
    CHECK_FALSE(strong3);
    CHECK_FALSE(s3.strong);
}

TEST_CASE("envelope detector never chatters inside the band", "[device][detector][property]") {
    Rng rng(5);
    std::uniform_real_distribution<double> band(-41.999, -40.001);
    for (bool start : {false, true}) {
        EnvelopeDetectorModel det;
        det.strong = start;
        for (int k = 0; k < 2000; ++k) {
            auto [next, strong] = envelope_detect(det, band(rng));
            CHECK(strong == start);
            det = next;
        }
    }
}
