#include "tunnelscatter/device.hpp"

#include "tunnelscatter/channel.hpp"
#include "tunnelscatter/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tunnelscatter::device {

IVCurve::IVCurve(std::vector<IVPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
        throw ConfigurationError("IVCurve: need at least two points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].current < 0.0) {
            throw ConfigurationError("IVCurve: negative current at point " + std::to_string(i));
        }
        if (i > 0 && !(points_[i].voltage > points_[i - 1].voltage)) {
            throw ConfigurationError("IVCurve: voltages must be strictly increasing (point " +
                                     std::to_string(i) + ")");
        }
    }
}

std::vector<IVPoint> IVCurve::default_points() {
    return {{0.000, 0.0},
            {0.065, 1.00e-3},
            {0.095, 0.60e-3},
            {0.150, 0.408e-3},
            {0.480, 0.12e-3},
            {0.550, 1.00e-3}};
}

IVCurve IVCurve::default_curve() { return IVCurve(default_points()); }

void validate(const RegionOfInterest& region, const IVCurve& curve) {
    if (!(region.v_lo < region.v_hi)) {
        throw ConfigurationError("RegionOfInterest: v_lo must be below v_hi");
    }
    if (region.v_lo < curve.v_min() || region.v_hi > curve.v_max()) {
        throw ConfigurationError("RegionOfInterest: bounds outside the IV curve domain");
    }
}

double iv_current(const IVCurve& curve, double v) {
    if (!(v >= curve.v_min() && v <= curve.v_max())) {
        throw DomainError("iv_current: voltage " + std::to_string(v) + " V outside curve domain");
    }
    auto pts = curve.points();
    auto hi = std::lower_bound(pts.begin(), pts.end(), v,
                               [](const IVPoint& p, double x) { return p.voltage < x; });
    if (hi->voltage == v) return hi->current;
    auto lo = hi - 1;
    const double t = (v - lo->voltage) / (hi->voltage - lo->voltage);
    return lo->current + t * (hi->current - lo->current);
}

double negative_resistance(const IVCurve& curve, const RegionOfInterest& region) {
    validate(region, curve);

    // Every knot inside the region plus both ends must be strictly decreasing.
    double prev = iv_current(curve, region.v_lo);
    for (const auto& p : curve.points()) {
        if (p.voltage <= region.v_lo || p.voltage >= region.v_hi) continue;
        if (!(p.current < prev)) {
            throw InvalidRegionError("negative_resistance: curve not decreasing over region");
        }
        prev = p.current;
    }
    const double i_hi = iv_current(curve, region.v_hi);
    if (!(i_hi < prev)) {
        throw InvalidRegionError("negative_resistance: curve not decreasing over region");
    }

    const double slope = (i_hi - iv_current(curve, region.v_lo)) / (region.v_hi - region.v_lo);
    return 1.0 / slope;
}

double bias_power(const IVCurve& curve, double v) { return v * iv_current(curve, v); }

DriftProcess step_drift(const DriftProcess& process, double dt_s, Rng& rng) {
    if (!(dt_s > 0.0)) {
        throw DomainError("step_drift: dt must be positive");
    }
    DriftProcess next = process;
    const double a = std::exp(-dt_s / process.reversion_time_s);
    const double step_std = process.stationary_std_hz * std::sqrt(1.0 - a * a);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double z = gauss(rng);
    next.current_offset_hz = a * process.current_offset_hz + step_std * z;
    return next;
}

double oscillator_frequency(const OscillatorModel& model, double v_bias) {
    if (v_bias < model.region.v_lo || v_bias > model.region.v_hi) {
        throw NotOscillatingError("oscillator_frequency: bias " + std::to_string(v_bias) +
                                  " V outside region of interest");
    }
    return model.f_ref_hz + model.k_v_hz_per_v * (v_bias - model.v_ref) +
           model.drift.current_offset_hz;
}

double injection_lock_range(const ReflectionAmpModel& amp, double p_inj_dbm) {
    const double ratio = channel::dbm_to_mw(p_inj_dbm) / channel::dbm_to_mw(amp.p_osc_dbm);
    return amp.f_center_hz / (2.0 * amp.q_factor) * std::sqrt(ratio);
}

ReflectResult reflect(const ReflectionAmpModel& amp, double p_in_dbm, double detuning_hz) {
    const bool locked = std::abs(detuning_hz) <= injection_lock_range(amp, p_in_dbm);
    if (locked) {
        return {std::min(p_in_dbm + amp.g_max_db, amp.p_sat_dbm), true, detuning_hz};
    }
    return {amp.p_osc_dbm, false, 0.0};
}

double conventional_reflect(double p_in_dbm, double loss_db) { return p_in_dbm - loss_db; }

std::pair<EnvelopeDetectorModel, bool> envelope_detect(const EnvelopeDetectorModel& det,
                                                       double p_in_dbm) {
    EnvelopeDetectorModel next = det;
    if (p_in_dbm >= det.sensitivity_dbm) {
        next.strong = true;
    } else if (p_in_dbm < det.sensitivity_dbm - det.hysteresis_db) {
        next.strong = false;
    }
    return {next, next.strong};
}

}  // namespace tunnelscatter::device
