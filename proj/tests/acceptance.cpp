// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "oracles.hpp"
#include "tunnelscatter/channel.hpp"
#include "tunnelscatter/device.hpp"
#include "tunnelscatter/gesture.hpp"
#include "tunnelscatter/harness.hpp"
#include "tunnelscatter/receiver.hpp"
#include "tunnelscatter/tag.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

using namespace tunnelscatter;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

Bits random_bits(std::size_t n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Bits b(n);
    for (auto& x : b) x = coin(rng) ? 1 : 0;
    return b;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome negative_resistance() {
    const double r = device::negative_resistance(device::IVCurve::default_curve(), device::RegionOfInterest{});
    return {std::abs(r - (-287.0)) <= 0.02 * 287.0, fmt("R = %.3f ohm, want -287 +/- 2%%", r)};
}

Outcome bias_power() {
    const double p = device::bias_power(device::IVCurve::default_curve(), 0.095);
    return {std::abs(p - 57e-6) <= 0.01 * 57e-6, fmt("P = %.4g W, want 57 uW +/- 1%%", p)};
}

Outcome drift_statistics() {
    const int runs = 200, steps = 3600;
    const double dt = 6.0, bound = 80e3;
    std::vector<double> finals;
    int contained = 0;
    for (int r = 0; r < runs; ++r) {
        Rng rng(derive_seed(0xd21f7, r));
        device::DriftProcess p;
        double peak = 0.0;
        for (int k = 0; k < steps; ++k) {
            p = device::step_drift(p, dt, rng);
            peak = std::max(peak, std::abs(p.current_offset_hz));
        }
        finals.push_back(p.current_offset_hz);
        contained += peak <= bound;
    }
    const Eigen::Map<const Eigen::ArrayXd> f(finals.data(), runs);
    const double sd = std::sqrt((f - f.mean()).square().sum() / (runs - 1));
    const double frac = double(contained) / runs;
    const bool ok = std::abs(sd - 19e3) <= 0.2 * 19e3 && frac >= 0.95;
    return {ok, fmt("std %.0f Hz (want 19000 +/- 20%%), %.1f%% within 80 kHz (want >= 95%%)", sd, 100 * frac)};
}

Outcome bias_linearity() {
    const auto rows = harness::run_scenario(harness::preset("bias_sweep"));
    const auto n = Eigen::Index(rows.size());
    Eigen::VectorXd v(n), f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = rows[i].sweep_value;
        f(i) = rows[i].aux_value;
    }
    const bool span = n >= 2 && std::abs(v(0) - 0.095) < 1e-12 && std::abs(v(n - 1) - 0.150) < 1e-12;
    // Centre both axes so the 867 MHz offset does not swamp the fit.
    const double vm = v.mean(), fm = f.mean();
    Eigen::MatrixXd a(n, 2);
    a.col(0) = (v.array() - vm).matrix();
    a.col(1).setOnes();
    const Eigen::VectorXd fc = (f.array() - fm).matrix();
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(fc);
    const double dev = (a * coef - fc).cwiseAbs().maxCoeff();
    // 1e-6 Hz is a few ulp at 867 MHz: exact up to rounding.
    return {span && dev <= 1e-6, fmt("%td points, slope %.6g Hz/V, max deviation %.3g Hz", n, coef(0), dev)};
}

Outcome fsk_fidelity() {
    const double fs = 1e6;
    const channel::NoiseModel noise{0.0, fs};
    const double n_mw = channel::dbm_to_mw(channel::noise_floor(noise));
    std::string detail;
    bool ok = true;
    for (double ebn0 : {6.0, 8.0, 10.0, 12.0}) {
        Rng rng(derive_seed(0xf5c, static_cast<std::uint64_t>(ebn0)));
        long long errors = 0, total = 0;
        for (int chunk = 0; chunk < 10; ++chunk) {
            const auto bits = random_bits(10000, rng);
            auto wave = tag::fsk_modulate(bits, tag::kFskBitrate, tag::kFskSub0Hz, tag::kFskSub1Hz, fs);
            const double p_mw = std::pow(10.0, ebn0 / 10.0) * n_mw * tag::kFskBitrate / fs;
            wave = channel::scale_to_power(wave, channel::mw_to_dbm(p_mw));
            const auto rx = channel::propagate(wave, 0.0, noise, rng);
            const auto out = receiver::fsk_demodulate(rx, tag::kFskSub0Hz, tag::kFskSub1Hz, tag::kFskBitrate);
            for (std::size_t i = 0; i < bits.size(); ++i) errors += i >= out.size() || out[i] != bits[i];
            total += static_cast<long long>(bits.size());
        }
        const double ber = double(errors) / double(total);
        const double at = errors > 0 ? oracle::fsk_ebn0_db_for_ber(ber) : std::numeric_limits<double>::infinity();
        const double gap = std::abs(at - ebn0);
        ok = ok && gap <= 0.5;
        detail += fmt("%g dB: BER %.3g (%.2f dB off); ", ebn0, ber, gap);
    }
    return {ok, detail + "want <= 0.5 dB"};
}

Outcome ask_loopback() {
    Rng rng(0xa5c);
    auto bits = random_bits(10000, rng);
    bits[0] = 1;
    const int quiet_bits = 10;  // 100 RSS samples at 10 kHz / 1 kbps
    Bits padded(quiet_bits, 0);
    padded.insert(padded.end(), bits.begin(), bits.end());
    const channel::NoiseModel noise{0.0, 1e5};
    const auto env = tag::ask_modulate(padded, 1000.0, channel::noise_floor(noise) + 30.0, 1e4);
    const auto rx = channel::propagate(env, 0.0, noise, rng);
    const auto trace = receiver::rss_sample(rx, 1e4, 1e5);
    const auto est = receiver::estimate_noise_floor(trace, 100);
    receiver::RssTrace tail = trace;
    tail.samples_dbm = trace.samples_dbm.tail(trace.size() - 100).eval();
    const auto out = receiver::ask_demodulate(tail, 1000.0, est.threshold_dbm);
    long long errors = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) errors += i >= out.size() || out[i] != bits[i];
    return {errors == 0, fmt("%lld errors in %zu bits at 30 dB SNR, want 0", errors, bits.size())};
}

Outcome switchover() {
    const auto rows = harness::run_scenario(harness::preset("switchover"));
    bool flip_ok = true;
    double cross = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        const bool sw = r.selected_path == "rf_switch";
        flip_ok = flip_ok && (sw == (r.sweep_value >= -40.0));
        const double tunnel = sw ? r.aux_value : r.rx_power_dbm;
        const double conventional = sw ? r.rx_power_dbm : r.aux_value;
        if (std::isnan(cross) && conventional >= tunnel) cross = r.sweep_value;
    }
    const bool cross_ok = cross >= -40.0 && cross <= -30.0;
    return {flip_ok && cross_ok,
            fmt("path flips at -40 dBm: %s; curves cross at %g dBm (want [-40, -30])", flip_ok ? "yes" : "no", cross)};
}

Outcome aclt_range() {
    const auto near = harness::preset("walls18m");
    const auto lb = harness::link_budget(near);
    auto far = harness::with_override(near, "receiver_leg.distance_m", 30.0);
    far = harness::with_override(far, "receiver_leg.walls", 5);
    const auto lf = harness::link_budget(far);
    const double need = near.receiver.required_snr_db;
    const bool ok = lb.rx_power_dbm >= lb.noise_floor_dbm + need && lf.rx_power_dbm < lf.noise_floor_dbm + need;
    return {ok, fmt("18 m/3 walls: SNR %.2f dB; 30 m/5 walls: SNR %.2f dB; threshold %.0f dB", lb.snr_db,
                    lf.snr_db, need)};
}

Outcome weak_acs() {
    const auto cfg = harness::with_override(harness::preset("weak_acs_range"), "acs_at_tag_dbm", -58.0);
    const double t = harness::closing_range_m(cfg, tag::TxPath::tunnel);
    const double c = harness::closing_range_m(cfg, tag::TxPath::rf_switch);
    return {t >= 10.0 * c, fmt("tunnel %.3g m, conventional %.3g m, ratio %.2f (want >= 10)", t, c, t / c)};
}

Outcome ppp_table() {
    const double freqs[3] = {200.0, 500.0, 1000.0};
    const double lrp[3] = {5.8e-6, 7.9e-6, 11.4e-6};
    const double hrp[3] = {385e-6, 559e-6, 687e-6};
    bool exact = true;
    for (int i = 0; i < 3; ++i) exact = exact && tag::lrp_power(freqs[i]) == lrp[i] && tag::hrp_power(freqs[i]) == hrp[i];
    bool monotone = true;
    double pl = 0.0, ph = 0.0;
    for (double f = 200.0; f <= 1000.0; f += 1.0) {
        monotone = monotone && tag::lrp_power(f) >= pl && tag::hrp_power(f) >= ph;
        pl = tag::lrp_power(f);
        ph = tag::hrp_power(f);
    }
    return {exact && monotone, fmt("anchors exact: %s; interpolation monotone: %s", exact ? "yes" : "no",
                                   monotone ? "yes" : "no")};
}

// Smallest lux at which light_voltage reaches `target` volts.
double lux_for_voltage(const tag::LightSensorModel& m, tag::Gain g, double target) {
    double lo = 0.0, hi = 1e6;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (tag::light_voltage(m, mid, g) >= target ? hi : lo) = mid;
    }
    return hi;
}

Outcome light_sensor() {
    const tag::LightSensorModel m;
    const double detect = lux_for_voltage(m, tag::Gain::high, m.detect_threshold_v);
    const double sat_high = lux_for_voltage(m, tag::Gain::high, m.v_supply);
    const double sat_low = lux_for_voltage(m, tag::Gain::low, m.v_supply);
    const bool ok = std::abs(detect - 3.5) <= 0.01 * 3.5 && std::abs(sat_high - 350.0) <= 0.01 * 350.0 &&
                    sat_low <= 1.5 * 2200.0 && sat_low >= 2200.0 / 1.5;
    return {ok, fmt("high gain detects at %.3f lx, saturates at %.1f lx; low gain saturates at %.0f lx (x%.2f of 2200)",
                    detect, sat_high, sat_low, sat_low / 2200.0)};
}

gesture::GestureLabel one_bit(const gesture::GestureLabel& label, Rng& rng) {
    const tag::LightSensorModel sensor;
    const receiver::FrameFormat fmt;
    const auto trace = gesture::synthesize_gesture(label, 500.0, rng);
    const auto bits = gesture::encode_frames(trace, sensor, fmt);
    return gesture::classify_1bit(receiver::deframe(bits, fmt), trace.rate_hz);
}

Outcome gestures() {
    using gesture::GestureLabel;
    const std::vector<GestureLabel> labels{GestureLabel::swipe(), GestureLabel::tap(2), GestureLabel::tap(3),
                                           GestureLabel::block(), GestureLabel::swirl(gesture::SwirlDirection::cw),
                                           GestureLabel::swirl(gesture::SwirlDirection::ccw)};
    const int n = 100;
    int correct = 0;
    for (std::size_t l = 0; l < labels.size(); ++l) {
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(0x9e5 + l, i));
            correct += one_bit(labels[l], rng) == labels[l];
        }
    }
    const int total = n * int(labels.size());

    bool alike = true;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(0x9e5f, i));
        const auto a = one_bit(GestureLabel::push(), rng);
        const auto b = one_bit(GestureLabel::pull(), rng);
        alike = alike && a == b && a != GestureLabel::push() && a != GestureLabel::pull();
    }

    int multi = 0;
    const tag::LightSensorModel sensor;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(0x9e5a, i));
        for (const auto& label : {GestureLabel::push(), GestureLabel::pull()}) {
            const auto trace = gesture::synthesize_gesture(label, 200.0, rng);
            multi += gesture::classify_multibit(gesture::quantize_trace(trace, sensor), trace.rate_hz) == label;
        }
    }
    const double multi_acc = double(multi) / (2 * n);
    return {correct == total && alike && multi_acc >= 0.95,
            fmt("1-bit %d/%d correct; push/pull indistinguishable at 1 bit: %s; 4-bit push/pull %.1f%% (want >= 95%%)",
                correct, total, alike ? "yes" : "no", 100 * multi_acc)};
}

Outcome determinism() {
    std::string differing;
    for (const auto& name : harness::preset_names()) {
        const auto cfg = harness::preset(name);
        if (harness::to_csv(harness::run_scenario(cfg)) != harness::to_csv(harness::run_scenario(cfg))) {
            differing += " " + name;
        }
    }
    return {differing.empty(), differing.empty() ? fmt("%zu presets byte-identical across two runs",
                                                       harness::preset_names().size())
                                                 : "differing:" + differing};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"negative resistance", negative_resistance},
        {"bias power", bias_power},
        {"drift statistics", drift_statistics},
        {"bias-frequency linearity", bias_linearity},
        {"FSK modem fidelity", fsk_fidelity},
        {"ASK loopback", ask_loopback},
        {"switchover sweep", switchover},
        {"ACLT range", aclt_range},
        {"weak-ACS advantage", weak_acs},
        {"PPP power table", ppp_table},
        {"light sensor", light_sensor},
        {"gesture suite", gestures},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("%s %2zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
