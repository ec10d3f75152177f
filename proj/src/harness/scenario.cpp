#include "tunnelscatter/harness.hpp"

#include "tunnelscatter/errors.hpp"
#include "tunnelscatter/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace tunnelscatter::harness {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Zero bits sent before a frame burst: just enough to cover the receiver's
// quiet_len noise-estimation window.
int silence_bits(const ScenarioConfig& cfg) {
    const double spb = cfg.receiver.rss_rate_hz / cfg.tag.ask_bitrate;
    return static_cast<int>(std::ceil(cfg.receiver.quiet_len / spb));
}

constexpr int kTrailingBits = 2;

// The quiet window is noise-only, so the bit-clock search starts after it;
// a noise spike inside it would otherwise anchor the clock off phase.
Bits demodulate_aclt(const ScenarioConfig& cfg, const receiver::RssTrace& trace) {
    const auto est = receiver::estimate_noise_floor(trace, cfg.receiver.quiet_len);
    receiver::RssTrace payload = trace;
    payload.samples_dbm = trace.samples_dbm.tail(trace.size() - cfg.receiver.quiet_len).eval();
    return receiver::ask_demodulate(payload, cfg.tag.ask_bitrate, est.threshold_dbm);
}

double acs_at_tag(const ScenarioConfig& cfg) {
    if (cfg.mode != Mode::abt) return kNegInf;
    return *cfg.emitter_power_dbm - channel::path_loss(cfg.emitter_leg);
}

// Bit errors of `rx` against `tx`, minimized over alignments in
// [-max_shift, max_shift]. Bits missing from rx count as errors.
long long aligned_errors(const Bits& tx, const Bits& rx, int max_shift) {
    long long best = static_cast<long long>(tx.size());
    for (int d = -max_shift; d <= max_shift; ++d) {
        long long errors = 0;
        for (std::size_t i = 0; i < tx.size(); ++i) {
            const long long j = static_cast<long long>(i) + d;
            if (j < 0 || j >= static_cast<long long>(rx.size()) || rx[j] != tx[i]) ++errors;
            if (errors >= best) break;
        }
        best = std::min(best, errors);
    }
    return best;
}

// Longest common subsequence of payload lists: frames recovered in order.
long long frames_matched(const std::vector<Bits>& sent, const std::vector<Bits>& got) {
    std::vector<long long> prev(got.size() + 1, 0), cur(got.size() + 1, 0);
    for (std::size_t i = 1; i <= sent.size(); ++i) {
        for (std::size_t j = 1; j <= got.size(); ++j) {
            cur[j] = sent[i - 1] == got[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[got.size()];
}

std::vector<Bits> random_payloads(int frames, int payload_bits, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<Bits> out(frames, Bits(payload_bits));
    for (auto& p : out) {
        for (auto& b : p) b = coin(rng) ? 1 : 0;
    }
    return out;
}

struct LinkRun {
    Bits received;
    int max_shift = 0;
};

LinkRun aclt_link(const ScenarioConfig& cfg, const Bits& bits, double p_tx_dbm, Rng& rng) {
    Bits padded(silence_bits(cfg), 0);
    padded.insert(padded.end(), bits.begin(), bits.end());
    padded.insert(padded.end(), kTrailingBits, 0);

    const auto wave = tag::ask_modulate(padded, cfg.tag.ask_bitrate, p_tx_dbm, cfg.tag.envelope_rate_hz);
    const auto rx = channel::propagate(wave, channel::path_loss(cfg.receiver_leg), cfg.receiver.noise, rng);
    const auto trace = receiver::rss_sample(rx, cfg.receiver.rss_rate_hz, cfg.receiver.noise.bandwidth_hz);
    return {demodulate_aclt(cfg, trace), kTrailingBits};
}

LinkRun fsk_link(const ScenarioConfig& cfg, const Bits& bits, double p_tx_dbm, Rng& rng) {
    const auto& t = cfg.tag;
    auto wave = tag::fsk_modulate(bits, t.fsk_bitrate, t.f_sub0_hz, t.f_sub1_hz, t.fsk_sample_rate_hz,
                                  cfg.receiver_leg.center_freq_hz);
    wave = channel::scale_to_power(std::move(wave), p_tx_dbm);
    const channel::NoiseModel noise{cfg.receiver.noise.noise_figure_db, t.fsk_sample_rate_hz};
    const auto rx = channel::propagate(wave, channel::path_loss(cfg.receiver_leg), noise, rng);
    return {receiver::fsk_demodulate(rx, t.f_sub0_hz, t.f_sub1_hz, t.fsk_bitrate), 0};
}

MetricsRow budget_row(const ScenarioConfig& cfg, double sweep_value) {
    const auto lb = link_budget(cfg);
    MetricsRow row;
    row.sweep_value = sweep_value;
    row.rx_power_dbm = lb.rx_power_dbm;
    row.snr_db = lb.snr_db;
    row.selected_path = tag::to_string(lb.selected_path);
    return row;
}

std::vector<MetricsRow> run_link(const ScenarioConfig& cfg, double sweep_value, Rng& rng) {
    const auto lb = link_budget(cfg);
    const auto payloads = random_payloads(cfg.traffic.frames, cfg.receiver.frame.payload_bits, rng);
    const Bits bits = receiver::frame_bits(payloads, cfg.receiver.frame);

    const LinkRun run = cfg.mode == Mode::aclt ? aclt_link(cfg, bits, lb.tag_out_dbm, rng)
                                               : fsk_link(cfg, bits, lb.tag_out_dbm, rng);

    MetricsRow row = budget_row(cfg, sweep_value);
    row.frames_sent = cfg.traffic.frames;
    row.ber = bits.empty() ? 0.0
                           : double(aligned_errors(bits, run.received, run.max_shift)) / double(bits.size());
    row.frames_recovered = frames_matched(payloads, receiver::deframe(run.received, cfg.receiver.frame));

    const auto& t = cfg.tag;
    const device::IVCurve curve(t.iv_curve);
    if (cfg.mode == Mode::aclt) {
        const double duration = double(bits.size()) / t.ask_bitrate;
        const auto ones = std::count(bits.begin(), bits.end(), std::uint8_t{1});
        row.energy_consumed_j = device::bias_power(curve, t.v_bias) * double(ones) / t.ask_bitrate +
                                t.subcarrier_overhead_w * duration;
    } else {
        const double duration = double(bits.size()) / t.fsk_bitrate;
        row.energy_consumed_j = lb.selected_path == tag::TxPath::tunnel
                                    ? tag::tunnel_tx_power_w(curve, t.v_bias, t.subcarrier_overhead_w) * duration
                                    : t.switch_power_w * duration;
    }
    row.aux_name = "alt_rx_power_dbm";
    row.aux_value = lb.alt_rx_power_dbm;
    return {row};
}

std::vector<MetricsRow> run_bias_sweep(const ScenarioConfig& cfg, double sweep_value) {
    MetricsRow row = budget_row(cfg, sweep_value);
    const device::IVCurve curve(cfg.tag.iv_curve);
    row.energy_consumed_j = device::bias_power(curve, cfg.tag.v_bias) * 1.0;
    row.aux_name = "frequency_hz";
    row.aux_value = device::oscillator_frequency(cfg.tag.oscillator, cfg.tag.v_bias);
    return {row};
}

std::vector<MetricsRow> run_drift(const ScenarioConfig& cfg, Rng& rng) {
    const MetricsRow proto = budget_row(cfg, 0.0);
    const double p_bias = device::bias_power(device::IVCurve(cfg.tag.iv_curve), cfg.tag.v_bias);
    const auto steps = static_cast<long>(std::floor(cfg.traffic.duration_s / cfg.traffic.step_s + 1e-9));

    std::vector<MetricsRow> rows;
    rows.reserve(steps + 1);
    device::DriftProcess drift = cfg.tag.oscillator.drift;
    for (long k = 0; k <= steps; ++k) {
        if (k > 0) drift = device::step_drift(drift, cfg.traffic.step_s, rng);
        MetricsRow row = proto;
        row.sweep_value = double(k) * cfg.traffic.step_s;
        row.energy_consumed_j = p_bias * row.sweep_value;
        row.aux_name = "drift_offset_hz";
        row.aux_value = drift.current_offset_hz;
        rows.push_back(row);
    }
    return rows;
}

std::vector<MetricsRow> run_harvest(const ScenarioConfig& cfg, double sweep_value) {
    const auto& tr = cfg.traffic;
    tag::HarvesterState h = cfg.tag.harvester;
    const double inf = std::numeric_limits<double>::infinity();
    double t = 0.0;
    double cold_start = h.cap_voltage >= h.cold_start_v ? 0.0 : inf;
    double full = h.cap_voltage >= h.max_v ? 0.0 : inf;
    while (full == inf && t < tr.harvest_horizon_s) {
        h = tag::harvest_step(h, tr.lux, tr.load_w, tr.harvest_dt_s);
        t += tr.harvest_dt_s;
        if (cold_start == inf && h.cap_voltage >= h.cold_start_v) cold_start = t;
        if (h.cap_voltage >= h.max_v) full = t;
    }

    MetricsRow row = budget_row(cfg, sweep_value);
    row.energy_consumed_j = tr.load_w * t;
    MetricsRow a = row, b = row;
    a.aux_name = "cold_start_time_s";
    a.aux_value = cold_start;
    b.aux_name = "full_charge_time_s";
    b.aux_value = full;
    return {a, b};
}

std::vector<MetricsRow> run_gestures(const ScenarioConfig& cfg, double sweep_value, std::uint64_t seed) {
    const auto& tr = cfg.traffic;
    const auto lb = link_budget(cfg);
    const MetricsRow proto = budget_row(cfg, sweep_value);
    const device::IVCurve curve(cfg.tag.iv_curve);
    const double p_bias = device::bias_power(curve, cfg.tag.v_bias);

    std::vector<MetricsRow> rows;
    for (std::size_t g = 0; g < tr.gestures.size(); ++g) {
        const auto label = gesture::parse_label(tr.gestures[g]);
        long long bits_total = 0, bit_errors = 0, frames_sent = 0, frames_recovered = 0;
        double energy = 0.0;
        int hits_1bit = 0, hits_multibit = 0;

        for (int i = 0; i < tr.gesture_instances; ++i) {
            Rng rng(derive_seed(seed, g * 1000003ULL + std::uint64_t(i)));

            const auto trace = gesture::synthesize_gesture(label, tr.ambient_lux, rng);
            const Bits bits = gesture::encode_frames(trace, cfg.tag.light_sensor, cfg.receiver.frame);
            const LinkRun run = aclt_link(cfg, bits, lb.tag_out_dbm, rng);
            const auto frames = receiver::deframe(run.received, cfg.receiver.frame);

            const auto flen = static_cast<std::size_t>(cfg.receiver.frame.frame_length());
            std::vector<Bits> sent;
            for (std::size_t k = 0; k + flen <= bits.size(); k += flen) {
                sent.emplace_back(bits.begin() + std::ptrdiff_t(k + cfg.receiver.frame.preamble.size()),
                                  bits.begin() + std::ptrdiff_t(k + flen));
            }
            bits_total += static_cast<long long>(bits.size());
            bit_errors += aligned_errors(bits, run.received, run.max_shift);
            frames_sent += static_cast<long long>(sent.size());
            frames_recovered += frames_matched(sent, frames);
            energy += p_bias * double(std::count(bits.begin(), bits.end(), std::uint8_t{1})) /
                      cfg.tag.ask_bitrate;
            if (gesture::classify_1bit(frames, trace.rate_hz) == label) ++hits_1bit;

            const auto mb = gesture::synthesize_gesture(label, tr.multibit_ambient_lux, rng);
            const auto codes = gesture::quantize_trace(mb, cfg.tag.light_sensor);
            if (gesture::classify_multibit(codes, mb.rate_hz) == label) ++hits_multibit;
        }

        MetricsRow one = proto;
        one.ber = bits_total ? double(bit_errors) / double(bits_total) : 0.0;
        one.frames_sent = frames_sent;
        one.frames_recovered = frames_recovered;
        one.energy_consumed_j = energy;
        one.aux_name = "accuracy_1bit:" + tr.gestures[g];
        one.aux_value = double(hits_1bit) / double(tr.gesture_instances);
        rows.push_back(one);

        MetricsRow multi = proto;
        multi.aux_name = "accuracy_multibit:" + tr.gestures[g];
        multi.aux_value = double(hits_multibit) / double(tr.gesture_instances);
        rows.push_back(multi);
    }
    return rows;
}

std::vector<MetricsRow> run_point(const ScenarioConfig& cfg, double sweep_value, std::uint64_t seed) {
    validate(cfg);
    Rng rng(seed);
    switch (cfg.experiment) {
        case Experiment::link: return run_link(cfg, sweep_value, rng);
        case Experiment::bias_sweep: return run_bias_sweep(cfg, sweep_value);
        case Experiment::drift: return run_drift(cfg, rng);
        case Experiment::harvest: return run_harvest(cfg, sweep_value);
        case Experiment::gestures: return run_gestures(cfg, sweep_value, seed);
    }
    return {};
}

}  // namespace

double tag_output_dbm(const ScenarioConfig& cfg, tag::TxPath path) {
    if (cfg.mode == Mode::aclt) {
        return path == tag::TxPath::tunnel ? cfg.tag.oscillator.p_out_dbm : kNegInf;
    }
    const double acs = acs_at_tag(cfg);
    if (path == tag::TxPath::rf_switch) {
        return device::conventional_reflect(acs, cfg.tag.conventional_loss_db);
    }
    const auto r = device::reflect(cfg.tag.amplifier, acs, cfg.acs_detuning_hz);
    return r.locked ? r.p_out_dbm : kNegInf;
}

LinkBudget link_budget(const ScenarioConfig& cfg) {
    LinkBudget lb{};
    lb.acs_at_tag_dbm = acs_at_tag(cfg);

    if (cfg.mode == Mode::aclt) {
        try {
            device::oscillator_frequency(cfg.tag.oscillator, cfg.tag.v_bias);
        } catch (const NotOscillatingError& e) {
            throw ValidationError("tag.v_bias", e.what());
        }
        lb.selected_path = tag::TxPath::tunnel;
        lb.locked = true;
    } else {
        switch (cfg.tag.path_policy) {
            case PathPolicy::automatic:
                lb.selected_path = tag::select_tx_path(cfg.tag.detector, lb.acs_at_tag_dbm).second;
                break;
            case PathPolicy::tunnel: lb.selected_path = tag::TxPath::tunnel; break;
            case PathPolicy::rf_switch: lb.selected_path = tag::TxPath::rf_switch; break;
        }
        lb.locked = device::reflect(cfg.tag.amplifier, lb.acs_at_tag_dbm, cfg.acs_detuning_hz).locked;
    }

    const auto other = lb.selected_path == tag::TxPath::tunnel ? tag::TxPath::rf_switch : tag::TxPath::tunnel;
    lb.tag_out_dbm = tag_output_dbm(cfg, lb.selected_path);
    lb.alt_tag_out_dbm = tag_output_dbm(cfg, other);

    const double loss = channel::path_loss(cfg.receiver_leg);
    lb.rx_power_dbm = lb.tag_out_dbm - loss;
    lb.alt_rx_power_dbm = lb.alt_tag_out_dbm - loss;
    lb.noise_floor_dbm = channel::noise_floor(cfg.receiver.noise);
    lb.snr_db = lb.rx_power_dbm - lb.noise_floor_dbm;
    return lb;
}

double closing_range_m(const ScenarioConfig& cfg, tag::TxPath path) {
    const double threshold = channel::noise_floor(cfg.receiver.noise) + cfg.receiver.required_snr_db;
    return channel::closing_range_m(tag_output_dbm(cfg, path), cfg.receiver_leg, threshold);
}

receiver::RssTrace simulate_aclt_trace(const ScenarioConfig& cfg, std::span<const std::uint8_t> bits,
                                       Rng& rng) {
    validate(cfg);
    if (cfg.mode != Mode::aclt) throw ValidationError("mode", "RSS traces are produced in aclt mode");
    Bits padded(silence_bits(cfg), 0);
    padded.insert(padded.end(), bits.begin(), bits.end());
    padded.insert(padded.end(), kTrailingBits, 0);
    const auto wave = tag::ask_modulate(padded, cfg.tag.ask_bitrate, cfg.tag.oscillator.p_out_dbm,
                                        cfg.tag.envelope_rate_hz);
    const auto rx = channel::propagate(wave, channel::path_loss(cfg.receiver_leg), cfg.receiver.noise, rng);
    return receiver::rss_sample(rx, cfg.receiver.rss_rate_hz, cfg.receiver.noise.bandwidth_hz);
}

std::vector<MetricsRow> run_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    if (!cfg.sweep) return run_point(cfg, 0.0, derive_seed(cfg.seed, 0));

    const auto& s = *cfg.sweep;
    std::vector<ScenarioConfig> points;
    points.reserve(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        ScenarioConfig point = cfg;
        point.sweep.reset();
        point = with_override(point, s.parameter, s.values[i]);
        for (const auto& [key, values] : s.coupled) point = with_override(point, key, values[i]);
        points.push_back(std::move(point));
    }

    std::vector<std::vector<MetricsRow>> results(points.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < points.size(); begin += workers) {
        const std::size_t end = std::min(points.size(), begin + workers);
        if (end - begin == 1) {
            results[begin] = run_point(points[begin], s.values[begin], derive_seed(cfg.seed, begin));
            continue;
        }
        std::vector<std::future<std::vector<MetricsRow>>> jobs;
        for (std::size_t i = begin; i < end; ++i) {
            jobs.push_back(std::async(std::launch::async, run_point, std::cref(points[i]), s.values[i],
                                      derive_seed(cfg.seed, i)));
        }
        for (std::size_t i = begin; i < end; ++i) results[i] = jobs[i - begin].get();
    }

    std::vector<MetricsRow> rows;
    for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
    return rows;
}

}  // namespace tunnelscatter::harness
