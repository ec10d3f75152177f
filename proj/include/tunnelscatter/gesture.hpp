#pragma once

// Synthetic hand gestures over four light sensors, tag-side framing
// (parallel-to-serial) and edge-side rule-based classification.

#include "tunnelscatter/receiver.hpp"
#include "tunnelscatter/signal.hpp"
#include "tunnelscatter/tag.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tunnelscatter::gesture {

inline constexpr int kSensors = 4;

enum class GestureKind { swipe, taps, block, swirl, push, pull, unknown };
enum class SwirlDirection { cw, ccw };

struct GestureLabel {
    GestureKind kind = GestureKind::unknown;
    int taps = 0;                               // only for GestureKind::taps
    SwirlDirection direction = SwirlDirection::cw;  // only for GestureKind::swirl

    static GestureLabel swipe() { return {GestureKind::swipe}; }
    static GestureLabel tap(int k) { return {GestureKind::taps, k}; }
    static GestureLabel block() { return {GestureKind::block}; }
    static GestureLabel swirl(SwirlDirection d) { return {GestureKind::swirl, 0, d}; }
    static GestureLabel push() { return {GestureKind::push}; }
    static GestureLabel pull() { return {GestureKind::pull}; }
    static GestureLabel unknown() { return {GestureKind::unknown}; }

    friend bool operator==(const GestureLabel& a, const GestureLabel& b) {
        if (a.kind != b.kind) return false;
        if (a.kind == GestureKind::taps) return a.taps == b.taps;
        if (a.kind == GestureKind::swirl) return a.direction == b.direction;
        return true;
    }
};

/// "swipe", "taps(3)", "block", "swirl(cw)", "swirl(ccw)", "push", "pull", "unknown".
std::string to_string(const GestureLabel& label);
GestureLabel parse_label(const std::string& text);

using LuxSeries = Eigen::Array<double, Eigen::Dynamic, kSensors>;
using CodeSeries = Eigen::Array<int, Eigen::Dynamic, kSensors>;

struct LightTrace {
    LuxSeries lux;
    double rate_hz = 200.0;
    double ambient_lux = 500.0;

    Eigen::Index size() const noexcept { return lux.rows(); }
};

/// Template timings (seconds) and depths (fraction of ambient).
struct TemplateParams {
    double rate_hz = 200.0;
    double lead_s = 0.5;
    double tail_s = 0.5;
    double swipe_min_s = 0.10, swipe_max_s = 0.30;
    double tap_min_s = 0.10, tap_max_s = 0.20;
    double gap_min_s = 0.15, gap_max_s = 0.40;
    double block_min_s = 1.0, block_max_s = 2.0;
    double swirl_min_s = 0.15, swirl_max_s = 0.30;
    double swirl_max_overlap = 0.5;
    double ramp_min_s = 0.5, ramp_max_s = 1.5;
    double hold_s = 0.5;
    double occlusion_depth = 0.05;
    double push_depth = 0.10;
    double min_ambient_lux = 30.0;
};

/// Requires ambient above the passive detection threshold; throws
/// std::invalid_argument otherwise.
LightTrace synthesize_gesture(const GestureLabel& label, double ambient_lux, Rng& rng,
                              const TemplateParams& params = {});

/// One frame per trace sample: preamble followed by four occlusion bits
/// (bit i = 1 iff sensor i is below the passive threshold).
Bits encode_frames(const LightTrace& trace, const tag::LightSensorModel& sensor,
                   const receiver::FrameFormat& fmt);

struct ClassifierParams {
    double brief_max_s = 0.4;
    double block_min_s = 0.8;
    int smoothing_window = 5;
    int min_ramp_levels = 4;
    double min_ramp_s = 0.25;
    int min_ramp_sensors = 3;
    int occlusion_code = 1;  // code <= this counts as occluded
};

GestureLabel classify_1bit(std::span<const Bits> frames, double rate_hz,
                           const ClassifierParams& params = {});

/// Per-sensor gain switchover, light_voltage and lrp_quantize against v_supply.
CodeSeries quantize_trace(const LightTrace& trace, const tag::LightSensorModel& sensor);

GestureLabel classify_multibit(const CodeSeries& codes, double rate_hz,
                               const ClassifierParams& params = {});

/// Light trace CSV: "# rate_hz=<r> ambient_lux=<a>", "sample_index,s1,s2,s3,s4", rows.
void write_light_trace_csv(const LightTrace& trace, std::ostream& out);
LightTrace read_light_trace_csv(std::istream& in);

struct ClassificationRecord {
    std::string trace_id;
    GestureLabel expected;
    GestureLabel predicted;
};

/// "trace_id,expected,predicted" then one line per record.
void write_classification_csv(std::span<const ClassificationRecord> records, std::ostream& out);
std::vector<ClassificationRecord> read_classification_csv(std::istream& in);

}  // namespace tunnelscatter::gesture
