#include "tunnelscatter/tag.hpp"

#include "tunnelscatter/channel.hpp"
#include "tunnelscatter/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tunnelscatter::tag {

namespace {

HarvesterMode mode_for(const HarvesterState& s) {
    return s.cap_voltage < s.cold_start_v ? HarvesterMode::cold : HarvesterMode::normal;
}

double efficiency(const HarvesterState& s, HarvesterMode mode) {
    return mode == HarvesterMode::cold ? s.cold_efficiency : 1.0;
}

struct TablePoint {
    double fs_hz;
    double power_w;
};

constexpr std::array<TablePoint, 3> kLrpTable{{{200.0, 5.8e-6}, {500.0, 7.9e-6}, {1000.0, 11.4e-6}}};
constexpr std::array<TablePoint, 3> kHrpTable{{{200.0, 385e-6}, {500.0, 559e-6}, {1000.0, 687e-6}}};

double interpolate(const std::array<TablePoint, 3>& table, double fs_hz, const char* name) {
    if (!(fs_hz >= table.front().fs_hz && fs_hz <= table.back().fs_hz)) {
        throw DomainError(std::string(name) + ": sampling frequency " + std::to_string(fs_hz) +
                          " Hz outside [200, 1000] Hz");
    }
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (fs_hz <= table[i].fs_hz) {
            const auto& a = table[i - 1];
            const auto& b = table[i];
            const double t = (fs_hz - a.fs_hz) / (b.fs_hz - a.fs_hz);
            return a.power_w + t * (b.power_w - a.power_w);
        }
    }
    return table.back().power_w;
}

double quantize_levels(double v, double v_full_scale, double levels) {
    if (!(v_full_scale > 0.0)) {
        throw DomainError("quantize: full scale must be positive");
    }
    const double x = std::clamp(v / v_full_scale, 0.0, 1.0);
    return std::nearbyint(levels * x);  // FE_TONEAREST: ties to even
}

}  // namespace

HarvesterState make_harvester(double cap_voltage) {
    HarvesterState s;
    s.cap_voltage = std::clamp(cap_voltage, 0.0, s.max_v);
    s.mode = mode_for(s);
    return s;
}

HarvesterState harvest_step(const HarvesterState& state, double lux, double load_w, double dt_s) {
    if (!(dt_s > 0.0) || lux < 0.0 || load_w < 0.0) {
        throw DomainError("harvest_step: requires dt > 0, lux >= 0, load >= 0");
    }
    HarvesterState next = state;
    const double p_in = efficiency(state, state.mode) * state.harvest_coeff_w_per_lux * lux;
    const double energy = 0.5 * state.capacitance_f * state.cap_voltage * state.cap_voltage +
                          (p_in - load_w) * dt_s;
    const double v = std::sqrt(2.0 * std::max(energy, 0.0) / state.capacitance_f);
    next.cap_voltage = std::clamp(v, 0.0, state.max_v);
    next.mode = mode_for(next);
    return next;
}

double charge_time_s(const HarvesterState& params, double lux, double v_from, double v_to) {
    v_to = std::min(v_to, params.max_v);
    if (v_to <= v_from) return 0.0;
    if (!(lux > 0.0)) return std::numeric_limits<double>::infinity();

    const double c = params.capacitance_f;
    const double p_normal = params.harvest_coeff_w_per_lux * lux;
    const double p_cold = params.cold_efficiency * p_normal;
    double t = 0.0;
    double v = v_from;
    if (v < params.cold_start_v) {
        const double v_end = std::min(v_to, params.cold_start_v);
        t += 0.5 * c * (v_end * v_end - v * v) / p_cold;
        v = v_end;
    }
    if (v < v_to) {
        t += 0.5 * c * (v_to * v_to - v * v) / p_normal;
    }
    return t;
}

double light_voltage(const LightSensorModel& model, double lux, Gain gain) {
    const double r = gain == Gain::high ? model.r_high : model.r_low;
    return std::clamp(model.responsivity_a_per_lux * std::max(lux, 0.0) * r, 0.0, model.v_supply);
}

Gain gain_switchover(const LightSensorModel& model, double lux) {
    if (model.gain_state == Gain::high && lux >= model.switch_to_low_lux) return Gain::low;
    if (model.gain_state == Gain::low && lux <= model.switch_to_high_lux) return Gain::high;
    return model.gain_state;
}

std::uint8_t lrp_quantize(double v, double v_full_scale) {
    return static_cast<std::uint8_t>(quantize_levels(v, v_full_scale, 15.0));
}

std::uint16_t hrp_quantize(double v, double v_full_scale) {
    return static_cast<std::uint16_t>(quantize_levels(v, v_full_scale, 4095.0));
}

double lrp_power(double fs_hz) { return interpolate(kLrpTable, fs_hz, "lrp_power"); }
double hrp_power(double fs_hz) { return interpolate(kHrpTable, fs_hz, "hrp_power"); }

std::pair<PppState, PppSample> ppp_step(const PppState& state, const HarvesterState& harvester,
                                        double v_in) {
    PppState next = state;
    const int code = lrp_quantize(v_in, state.v_full_scale);
    const bool event = state.last_lrp_code >= 0 &&
                       std::abs(code - state.last_lrp_code) >= state.event_levels;
    next.last_lrp_code = code;

    const double period = 1.0 / state.sample_rate_hz;
    if (event && harvester.cap_voltage >= state.hrp_wake_v) {
        next.resolution = Resolution::hrp_12bit;
        return {next,
                {hrp_quantize(v_in, state.v_full_scale), Resolution::hrp_12bit,
                 hrp_power(state.sample_rate_hz) * period}};
    }
    next.resolution = Resolution::lrp_4bit;
    return {next,
            {static_cast<std::uint16_t>(code), Resolution::lrp_4bit,
             lrp_power(state.sample_rate_hz) * period}};
}

const char* to_string(TxPath path) noexcept {
    return path == TxPath::tunnel ? "tunnel" : "rf_switch";
}

std::pair<device::EnvelopeDetectorModel, TxPath> select_tx_path(
    const device::EnvelopeDetectorModel& det, double p_acs_at_tag_dbm) {
    auto [next, strong] = device::envelope_detect(det, p_acs_at_tag_dbm);
    return {next, strong ? TxPath::rf_switch : TxPath::tunnel};
}

PowerEnvelope ask_modulate(std::span<const std::uint8_t> bits, double bitrate, double p_on_dbm,
                           double fs_hz) {
    if (!(bitrate > 0.0) || !(fs_hz >= 10.0 * bitrate)) {
        throw ConfigurationError("ask_modulate: sample rate must be at least 10x the bitrate");
    }
    const auto n_bits = static_cast<Eigen::Index>(bits.size());
    PowerEnvelope env;
    env.sample_rate_hz = fs_hz;
    env.power_mw = PowerEnvelope::Samples::Zero(symbol_start(n_bits, fs_hz, bitrate));
    const double on_mw = channel::dbm_to_mw(p_on_dbm);
    for (Eigen::Index k = 0; k < n_bits; ++k) {
        if (!bits[k]) continue;
        const Eigen::Index a = symbol_start(k, fs_hz, bitrate);
        const Eigen::Index b = symbol_start(k + 1, fs_hz, bitrate);
        env.power_mw.segment(a, b - a).setConstant(on_mw);
    }
    return env;
}

ComplexBaseband fsk_modulate(std::span<const std::uint8_t> bits, double bitrate, double f_sub0_hz,
                             double f_sub1_hz, double fs_hz, double center_freq_hz) {
    const double f_max = std::max(std::abs(f_sub0_hz), std::abs(f_sub1_hz));
    if (!(bitrate > 0.0) || !(fs_hz >= 4.0 * f_max)) {
        throw ConfigurationError("fsk_modulate: sample rate must be at least 4x the highest tone");
    }
    const auto n_bits = static_cast<Eigen::Index>(bits.size());
    ComplexBaseband wave;
    wave.sample_rate_hz = fs_hz;
    wave.center_freq_hz = center_freq_hz;
    wave.occupied_bandwidth_hz = f_max + bitrate;
    wave.samples.resize(symbol_start(n_bits, fs_hz, bitrate));

    const double two_pi = 2.0 * std::numbers::pi;
    double phase = 0.0;
    for (Eigen::Index k = 0; k < n_bits; ++k) {
        const double step = two_pi * (bits[k] ? f_sub1_hz : f_sub0_hz) / fs_hz;
        const Eigen::Index b = symbol_start(k + 1, fs_hz, bitrate);
        for (Eigen::Index i = symbol_start(k, fs_hz, bitrate); i < b; ++i) {
            wave.samples(i) = std::polar(1.0, phase);
            phase = std::fmod(phase + step, two_pi);
        }
    }
    return wave;
}

double tunnel_tx_power_w(const device::IVCurve& curve, double v_bias, double overhead_w) {
    return device::bias_power(curve, v_bias) + overhead_w;
}

}  // namespace tunnelscatter::tag
