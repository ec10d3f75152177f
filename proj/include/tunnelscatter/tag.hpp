#pragma once

// TunnelTag: harvester with cold start, light sensor with gain switchover,
// polymorphic processing pipeline (LRP/HRP), transmit-path selection and
// the ASK / FSK modulators.

#include "tunnelscatter/device.hpp"
#include "tunnelscatter/signal.hpp"

#include <cstdint>
#include <span>
#include <utility>

namespace tunnelscatter::tag {

enum class HarvesterMode { cold, normal };

struct HarvesterState {
    double cap_voltage = 0.0;
    double capacitance_f = 7.5e-3;
    double cold_start_v = 1.8;
    double max_v = 3.3;
    HarvesterMode mode = HarvesterMode::cold;
    double harvest_coeff_w_per_lux = 0.2e-6;
    double cold_efficiency = 0.1;
};

/// Default harvester at `cap_voltage` with the mode derived from it.
HarvesterState make_harvester(double cap_voltage);

/// Energy balance on C V^2 / 2 over one step; the efficiency is the one of
/// the mode at the start of the step. Voltage clamped to [0, max_v].
HarvesterState harvest_step(const HarvesterState& state, double lux, double load_w, double dt_s);

/// Closed-form time to charge from v_from to v_to under constant light and
/// no load, crossing the cold-start boundary if needed. Infinite at 0 lux.
double charge_time_s(const HarvesterState& params, double lux, double v_from, double v_to);

enum class Gain { high, low };

struct LightSensorModel {
    double responsivity_a_per_lux = 6.35e-9;
    double r_high = 9.0e5;
    double r_low = 1.0e5;
    double v_supply = 2.0;
    double passive_threshold_lux = 30.0;
    double detect_threshold_v = 0.020;
    double switch_to_low_lux = 350.0;
    double switch_to_high_lux = 280.0;
    Gain gain_state = Gain::high;
};

double light_voltage(const LightSensorModel& model, double lux, Gain gain);

/// Next gain selection for `lux` given the model's current gain_state.
Gain gain_switchover(const LightSensorModel& model, double lux);

/// True when the passive receiver sees the sensor as occluded.
inline bool passive_occluded(const LightSensorModel& model, double lux) {
    return lux < model.passive_threshold_lux;
}

/// 16-level flash-ladder quantizer, round to nearest with ties to even.
std::uint8_t lrp_quantize(double v, double v_full_scale);

/// 12-bit ADC model of the microcontroller (same rounding rule).
std::uint16_t hrp_quantize(double v, double v_full_scale);

/// Measured pipeline power, linearly interpolated over [200, 1000] Hz.
double lrp_power(double fs_hz);
double hrp_power(double fs_hz);

enum class Resolution { lrp_4bit, hrp_12bit };

struct PppState {
    Resolution resolution = Resolution::lrp_4bit;
    double hrp_wake_v = 2.0;
    double sample_rate_hz = 200.0;
    double v_full_scale = 2.0;
    int event_levels = 2;
    int last_lrp_code = -1;  // -1 before the first sample
};

struct PppSample {
    std::uint16_t code;
    Resolution resolution;
    double energy_j;
};

std::pair<PppState, PppSample> ppp_step(const PppState& state, const HarvesterState& harvester,
                                        double v_in);

enum class TxPath { tunnel, rf_switch };
enum class Modulation { ask_aclt, fsk_abt };

struct TxMode {
    TxPath path = TxPath::tunnel;
    Modulation modulation = Modulation::ask_aclt;
};

const char* to_string(TxPath path) noexcept;

std::pair<device::EnvelopeDetectorModel, TxPath> select_tx_path(
    const device::EnvelopeDetectorModel& det, double p_acs_at_tag_dbm);

inline constexpr double kAskBitrate = 1000.0;
inline constexpr double kFskBitrate = 2900.0;
inline constexpr double kFskSub0Hz = 87.5e3;
inline constexpr double kFskSub1Hz = 112.5e3;

/// On-off keyed power envelope: `p_on_dbm` for ones, exactly zero for zeros.
/// Requires fs >= 10 * bitrate.
PowerEnvelope ask_modulate(std::span<const std::uint8_t> bits, double bitrate, double p_on_dbm,
                           double fs_hz);

/// Unit-amplitude continuous-phase FSK subcarrier. Requires fs >= 4 * max tone.
ComplexBaseband fsk_modulate(std::span<const std::uint8_t> bits, double bitrate, double f_sub0_hz,
                             double f_sub1_hz, double fs_hz, double center_freq_hz = 867.4e6);

/// Electrical power while transmitting on the tunnel path.
double tunnel_tx_power_w(const device::IVCurve& curve, double v_bias, double overhead_w = 0.0);

}  // namespace tunnelscatter::tag
