#include "tunnelscatter/gesture.hpp"

#include "tunnelscatter/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tunnelscatter::gesture {

std::string to_string(const GestureLabel& label) {
    switch (label.kind) {
        case GestureKind::swipe: return "swipe";
        case GestureKind::taps: return "taps(" + std::to_string(label.taps) + ")";
        case GestureKind::block: return "block";
        case GestureKind::swirl:
            return label.direction == SwirlDirection::cw ? "swirl(cw)" : "swirl(ccw)";
        case GestureKind::push: return "push";
        case GestureKind::pull: return "pull";
        case GestureKind::unknown: break;
    }
    return "unknown";
}

GestureLabel parse_label(const std::string& text) {
    if (text == "swipe") return GestureLabel::swipe();
    if (text == "block") return GestureLabel::block();
    if (text == "push") return GestureLabel::push();
    if (text == "pull") return GestureLabel::pull();
    if (text == "unknown") return GestureLabel::unknown();
    if (text == "swirl(cw)") return GestureLabel::swirl(SwirlDirection::cw);
    if (text == "swirl(ccw)") return GestureLabel::swirl(SwirlDirection::ccw);
    int k = 0;
    char close = 0;
    if (std::sscanf(text.c_str(), "taps(%d%c", &k, &close) == 2 && close == ')' && k >= 1) {
        return GestureLabel::tap(k);
    }
    throw std::invalid_argument("unknown gesture label '" + text + "'");
}

namespace {

struct Interval {
    int sensor;
    double t0;
    double t1;
};

Eigen::Index to_index(double t, double rate) {
    return static_cast<Eigen::Index>(std::ceil(t * rate - 1e-9));
}

void occlude(LuxSeries& lux, const Interval& iv, double level, double rate) {
    const Eigen::Index a = std::clamp<Eigen::Index>(to_index(iv.t0, rate), 0, lux.rows());
    const Eigen::Index b = std::clamp<Eigen::Index>(to_index(iv.t1, rate), 0, lux.rows());
    if (b > a) lux.col(iv.sensor).segment(a, b - a).setConstant(level);
}

/// Linear ramp of all sensors from `from` to `to` over [t0, t1), holding
/// `to` afterwards and `from` before.
void ramp_all(LuxSeries& lux, double t0, double t1, double from, double to, double rate) {
    for (Eigen::Index i = 0; i < lux.rows(); ++i) {
        const double t = double(i) / rate;
        double v = from;
        if (t >= t1) {
            v = to;
        } else if (t >= t0) {
            v = from + (to - from) * (t - t0) / (t1 - t0);
        }
        lux.row(i).setConstant(v);
    }
}

struct Run {
    Eigen::Index start;
    Eigen::Index length;
};

using Occlusion = Eigen::Array<bool, Eigen::Dynamic, kSensors>;

std::array<std::vector<Run>, kSensors> occlusion_runs(const Occlusion& occ) {
    std::array<std::vector<Run>, kSensors> runs;
    for (int s = 0; s < kSensors; ++s) {
        Eigen::Index i = 0;
        while (i < occ.rows()) {
            if (!occ(i, s)) {
                ++i;
                continue;
            }
            Eigen::Index j = i;
            while (j < occ.rows() && occ(j, s)) ++j;
            runs[s].push_back({i, j - i});
            i = j;
        }
    }
    return runs;
}

GestureLabel classify_occlusion(const Occlusion& occ, double rate, const ClassifierParams& p) {
    const auto runs = occlusion_runs(occ);
    std::vector<int> active;
    for (int s = 0; s < kSensors; ++s) {
        if (!runs[s].empty()) active.push_back(s);
    }

    if (active.size() == 1) {
        const auto& r = runs[active.front()];
        auto seconds = [rate](const Run& run) { return double(run.length) / rate; };
        if (r.size() == 1) {
            const double d = seconds(r.front());
            if (d < p.brief_max_s) return GestureLabel::swipe();
            if (d >= p.block_min_s) return GestureLabel::block();
            return GestureLabel::unknown();
        }
        const bool all_brief = std::all_of(r.begin(), r.end(), [&](const Run& run) {
            return seconds(run) < p.brief_max_s;
        });
        return all_brief ? GestureLabel::tap(static_cast<int>(r.size())) : GestureLabel::unknown();
    }

    if (active.size() >= 3) {
        std::vector<int> order = active;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return runs[a].front().start < runs[b].front().start;
        });
        int cw = 0;
        int ccw = 0;
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (runs[order[i]].front().start == runs[order[i - 1]].front().start) {
                return GestureLabel::unknown();
            }
            const int step = (order[i] - order[i - 1] + kSensors) % kSensors;
            cw += step == 1;
            ccw += step == kSensors - 1;
        }
        const int steps = static_cast<int>(order.size()) - 1;
        if (cw == steps) return GestureLabel::swirl(SwirlDirection::cw);
        if (ccw == steps) return GestureLabel::swirl(SwirlDirection::ccw);
    }
    return GestureLabel::unknown();
}

/// Longest monotone stretch (trimmed to its first and last strict change)
/// of the smoothed series, in samples, together with its total change.
struct Ramp {
    Eigen::Index span = 0;
    double change = 0.0;
};

Ramp longest_ramp(const Eigen::ArrayXd& s, int sign) {
    Ramp best;
    Eigen::Index i = 0;
    const Eigen::Index n = s.size();
    while (i + 1 < n) {
        // Extend while the series moves in `sign` direction or stays flat.
        Eigen::Index j = i;
        Eigen::Index first = -1;
        Eigen::Index last = -1;
        while (j + 1 < n && sign * (s(j + 1) - s(j)) >= -1e-12) {
            if (sign * (s(j + 1) - s(j)) > 1e-12) {
                if (first < 0) first = j;
                last = j + 1;
            }
            ++j;
        }
        if (first >= 0) {
            const Ramp r{last - first, sign * (s(last) - s(first))};
            if (r.change > best.change || (r.change == best.change && r.span > best.span)) best = r;
        }
        i = std::max(j, i + 1);
    }
    return best;
}

std::optional<GestureLabel> classify_ramp(const CodeSeries& codes, double rate,
                                          const ClassifierParams& p) {
    const Eigen::Index w = std::max(1, p.smoothing_window);
    if (codes.rows() < w + 1) return std::nullopt;
    const Eigen::Index n = codes.rows() - w + 1;

    int down = 0;
    int up = 0;
    Eigen::Index down_span = 0;
    Eigen::Index up_span = 0;
    for (int s = 0; s < kSensors; ++s) {
        Eigen::ArrayXd smooth(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            smooth(i) = codes.col(s).segment(i, w).cast<double>().mean();
        }
        auto qualifies = [&](const Ramp& r) {
            return r.change >= p.min_ramp_levels && double(r.span) / rate >= p.min_ramp_s;
        };
        const Ramp d = longest_ramp(smooth, -1);
        const Ramp u = longest_ramp(smooth, +1);
        if (qualifies(d)) {
            ++down;
            down_span += d.span;
        }
        if (qualifies(u)) {
            ++up;
            up_span += u.span;
        }
    }
    const bool is_push = down >= p.min_ramp_sensors;
    const bool is_pull = up >= p.min_ramp_sensors;
    if (is_push && (!is_pull || down_span > up_span)) return GestureLabel::push();
    if (is_pull && (!is_push || up_span > down_span)) return GestureLabel::pull();
    if (is_push && is_pull) return GestureLabel::unknown();
    return std::nullopt;
}

}  // namespace

LightTrace synthesize_gesture(const GestureLabel& label, double ambient_lux, Rng& rng,
                              const TemplateParams& p) {
    if (!(ambient_lux > p.min_ambient_lux)) {
        throw std::invalid_argument("synthesize_gesture: ambient must exceed the passive threshold");
    }
    auto uniform = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto pick_sensor = [&rng]() { return std::uniform_int_distribution<int>(0, kSensors - 1)(rng); };

    std::vector<Interval> intervals;
    double t = p.lead_s;
    double ramp_s = 0.0;
    switch (label.kind) {
        case GestureKind::swipe: {
            const double d = uniform(p.swipe_min_s, p.swipe_max_s);
            intervals.push_back({pick_sensor(), t, t + d});
            t += d;
            break;
        }
        case GestureKind::taps: {
            if (label.taps < 1) throw std::invalid_argument("synthesize_gesture: taps k must be >= 1");
            const int sensor = pick_sensor();
            for (int k = 0; k < label.taps; ++k) {
                if (k > 0) t += uniform(p.gap_min_s, p.gap_max_s);
                const double d = uniform(p.tap_min_s, p.tap_max_s);
                intervals.push_back({sensor, t, t + d});
                t += d;
            }
            break;
        }
        case GestureKind::block: {
            const double d = uniform(p.block_min_s, p.block_max_s);
            intervals.push_back({pick_sensor(), t, t + d});
            t += d;
            break;
        }
        case GestureKind::swirl: {
            const bool cw = label.direction == SwirlDirection::cw;
            double end = t;
            for (int k = 0; k < kSensors; ++k) {
                const int sensor = cw ? k : kSensors - 1 - k;
                const double d = uniform(p.swirl_min_s, p.swirl_max_s);
                intervals.push_back({sensor, t, t + d});
                end = std::max(end, t + d);
                t += d * (1.0 - uniform(0.0, p.swirl_max_overlap));
            }
            t = end;
            break;
        }
        case GestureKind::push:
        case GestureKind::pull:
            ramp_s = uniform(p.ramp_min_s, p.ramp_max_s);
            t += ramp_s + p.hold_s;
            break;
        case GestureKind::unknown:
            throw std::invalid_argument("synthesize_gesture: cannot synthesize 'unknown'");
    }

    const double total = (label.kind == GestureKind::push || label.kind == GestureKind::pull)
                             ? t
                             : t + p.tail_s;
    LightTrace trace;
    trace.rate_hz = p.rate_hz;
    trace.ambient_lux = ambient_lux;
    trace.lux = LuxSeries::Constant(to_index(total, p.rate_hz), kSensors, ambient_lux);

    const double near = p.push_depth * ambient_lux;
    if (label.kind == GestureKind::push) {
        ramp_all(trace.lux, p.lead_s, p.lead_s + ramp_s, ambient_lux, near, p.rate_hz);
    } else if (label.kind == GestureKind::pull) {
        // Hand starts close, then withdraws; the lead becomes the close hold.
        ramp_all(trace.lux, p.hold_s, p.hold_s + ramp_s, near, ambient_lux, p.rate_hz);
    }
    for (const auto& iv : intervals) {
        occlude(trace.lux, iv, p.occlusion_depth * ambient_lux, p.rate_hz);
    }
    return trace;
}

Bits encode_frames(const LightTrace& trace, const tag::LightSensorModel& sensor,
                   const receiver::FrameFormat& fmt) {
    if (fmt.payload_bits != kSensors) {
        throw ConfigurationError("encode_frames: gesture frames carry exactly 4 payload bits");
    }
    Bits out;
    out.reserve(static_cast<std::size_t>(trace.size()) * fmt.frame_length());
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        out.insert(out.end(), fmt.preamble.begin(), fmt.preamble.end());
        for (int s = 0; s < kSensors; ++s) {
            out.push_back(tag::passive_occluded(sensor, trace.lux(i, s)) ? 1 : 0);
        }
    }
    return out;
}

GestureLabel classify_1bit(std::span<const Bits> frames, double rate_hz,
                           const ClassifierParams& params) {
    Occlusion occ(static_cast<Eigen::Index>(frames.size()), kSensors);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].size() != kSensors) {
            throw ConfigurationError("classify_1bit: frame " + std::to_string(i) +
                                     " does not carry 4 bits");
        }
        for (int s = 0; s < kSensors; ++s) {
            occ(static_cast<Eigen::Index>(i), s) = frames[i][s] != 0;
        }
    }
    return classify_occlusion(occ, rate_hz, params);
}

CodeSeries quantize_trace(const LightTrace& trace, const tag::LightSensorModel& sensor) {
    CodeSeries codes(trace.size(), kSensors);
    for (int s = 0; s < kSensors; ++s) {
        tag::LightSensorModel m = sensor;
        for (Eigen::Index i = 0; i < trace.size(); ++i) {
            const double lux = trace.lux(i, s);
            m.gain_state = tag::gain_switchover(m, lux);
            codes(i, s) = tag::lrp_quantize(tag::light_voltage(m, lux, m.gain_state), m.v_supply);
        }
    }
    return codes;
}

GestureLabel classify_multibit(const CodeSeries& codes, double rate_hz,
                               const ClassifierParams& params) {
    if (auto ramp = classify_ramp(codes, rate_hz, params)) return *ramp;
    const Occlusion occ = codes <= params.occlusion_code;
    return classify_occlusion(occ, rate_hz, params);
}

void write_light_trace_csv(const LightTrace& trace, std::ostream& out) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "# rate_hz=%.10g ambient_lux=%.10g\n", trace.rate_hz,
                  trace.ambient_lux);
    out << buf << "sample_index,s1,s2,s3,s4\n";
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g,%.10g,%.10g\n", static_cast<long long>(i),
                      trace.lux(i, 0), trace.lux(i, 1), trace.lux(i, 2), trace.lux(i, 3));
        out << buf;
    }
}

LightTrace read_light_trace_csv(std::istream& in) {
    LightTrace trace;
    std::string line;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "# rate_hz=%lf ambient_lux=%lf",
                                               &trace.rate_hz, &trace.ambient_lux) != 2) {
        throw IoError("light trace csv: expected '# rate_hz=<r> ambient_lux=<a>' header");
    }
    if (!std::getline(in, line) || line.rfind("sample_index,s1,s2,s3,s4", 0) != 0) {
        throw IoError("light trace csv: expected column header");
    }
    std::vector<std::array<double, kSensors>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        long long idx = 0;
        std::array<double, kSensors> r{};
        if (std::sscanf(line.c_str(), "%lld,%lf,%lf,%lf,%lf", &idx, &r[0], &r[1], &r[2], &r[3]) != 5 ||
            idx != static_cast<long long>(rows.size())) {
            throw IoError("light trace csv: malformed row '" + line + "'");
        }
        rows.push_back(r);
    }
    trace.lux.resize(static_cast<Eigen::Index>(rows.size()), kSensors);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int s = 0; s < kSensors; ++s) trace.lux(static_cast<Eigen::Index>(i), s) = rows[i][s];
    }
    return trace;
}

void write_classification_csv(std::span<const ClassificationRecord> records, std::ostream& out) {
    out << "trace_id,expected,predicted\n";
    for (const auto& r : records) {
        out << r.trace_id << ',' << to_string(r.expected) << ',' << to_string(r.predicted) << '\n';
    }
}

std::vector<ClassificationRecord> read_classification_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("trace_id,expected,predicted", 0) != 0) {
        throw IoError("classification csv: expected column header");
    }
    std::vector<ClassificationRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, expected, predicted;
        if (!std::getline(ss, id, ',') || !std::getline(ss, expected, ',') ||
            !std::getline(ss, predicted)) {
            throw IoError("classification csv: malformed row '" + line + "'");
        }
        records.push_back({id, parse_label(expected), parse_label(predicted)});
    }
    return records;
}

}  // namespace tunnelscatter::gesture
