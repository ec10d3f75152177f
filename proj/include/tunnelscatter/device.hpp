#pragma once

// Behavioral tunnel-diode models: IV curve, negative resistance, bias power,
// free-running oscillator with drift, injection-locked reflection amplifier,
// RF-switch reflector and the passive envelope detector.

#include "tunnelscatter/signal.hpp"

#include <span>
#include <utility>
#include <vector>

namespace tunnelscatter::device {

struct IVPoint {
    double voltage;  // V
    double current;  // A
};

/// Piecewise-linear IV characteristic. Voltages strictly increasing,
/// currents nonnegative; the constructor enforces both.
class IVCurve {
public:
    explicit IVCurve(std::vector<IVPoint> points);

    /// 1N3712-like curve: peak at (65 mV, 1 mA), 57 uW at 95 mV and a
    /// -287 ohm slope across [95, 150] mV.
    static IVCurve default_curve();
    static std::vector<IVPoint> default_points();

    std::span<const IVPoint> points() const noexcept { return points_; }
    double v_min() const noexcept { return points_.front().voltage; }
    double v_max() const noexcept { return points_.back().voltage; }

private:
    std::vector<IVPoint> points_;
};

struct RegionOfInterest {
    double v_lo = 0.095;
    double v_hi = 0.150;
};

/// Throws ConfigurationError unless v_lo < v_hi and both lie on the curve.
void validate(const RegionOfInterest& region, const IVCurve& curve);

double iv_current(const IVCurve& curve, double v);

/// 1 / slope of the chord across the region. Throws InvalidRegionError if
/// the curve is not strictly decreasing over the region.
double negative_resistance(const IVCurve& curve, const RegionOfInterest& region);

double bias_power(const IVCurve& curve, double v);

/// Ornstein-Uhlenbeck frequency drift of the free-running oscillator.
struct DriftProcess {
    double stationary_std_hz = 1.9e4;
    double reversion_time_s = 3600.0;
    double current_offset_hz = 0.0;
};

/// Exact OU discretization: offset <- a*offset + std*sqrt(1 - a^2)*N(0,1),
/// a = exp(-dt/tau). Requires dt > 0.
DriftProcess step_drift(const DriftProcess& process, double dt_s, Rng& rng);

struct OscillatorModel {
    double f_ref_hz = 867.4e6;
    double v_ref = 0.095;
    double k_v_hz_per_v = 5.0e6;
    DriftProcess drift{};
    double p_out_dbm = -19.0;
    RegionOfInterest region{};
};

/// f_ref + k_v (v_bias - v_ref) + drift offset. Throws NotOscillatingError
/// when the bias lies outside the region of interest.
double oscillator_frequency(const OscillatorModel& model, double v_bias);

struct ReflectionAmpModel {
    double g_max_db = 35.0;
    double p_sat_dbm = -41.0;
    double q_factor = 50.0;
    double p_osc_dbm = -19.0;
    double f_center_hz = 867.4e6;
};

/// Adler-style lock half-width: (f / 2Q) * sqrt(P_inj / P_osc).
double injection_lock_range(const ReflectionAmpModel& amp, double p_inj_dbm);

struct ReflectResult {
    double p_out_dbm;
    bool locked;
    /// Output frequency relative to the free-running TDO frequency. Equals
    /// the injected detuning when locked, zero otherwise.
    double output_offset_hz;
};

/// Injection-locked reflection amplifier with hard compression at p_sat.
/// `detuning_hz` is the injected frequency minus the TDO frequency.
ReflectResult reflect(const ReflectionAmpModel& amp, double p_in_dbm, double detuning_hz);

inline constexpr double kDefaultSwitchLossDb = 6.0;

double conventional_reflect(double p_in_dbm, double loss_db = kDefaultSwitchLossDb);

struct EnvelopeDetectorModel {
    double sensitivity_dbm = -40.0;
    double hysteresis_db = 2.0;
    bool strong = false;
};

/// Latching comparator: strong at or above the sensitivity, weak below
/// sensitivity - hysteresis, unchanged in between.
std::pair<EnvelopeDetectorModel, bool> envelope_detect(const EnvelopeDetectorModel& det,
                                                       double p_in_dbm);

}  // namespace tunnelscatter::device
