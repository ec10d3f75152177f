#include <catch2/catch_amalgamated.hpp>

#include "tunnelscatter/errors.hpp"
#include "tunnelscatter/gesture.hpp"

#include <set>
#include <sstream>

using namespace tunnelscatter;
using namespace tunnelscatter::gesture;

namespace {

const std::vector<GestureLabel> kOneBitLabels{
    GestureLabel::swipe(),  GestureLabel::tap(2), GestureLabel::tap(3), GestureLabel::block(),
    GestureLabel::swirl(SwirlDirection::cw), GestureLabel::swirl(SwirlDirection::ccw)};

std::vector<Bits> payloads_of(const Bits& bits, const receiver::FrameFormat& fmt) {
    std::vector<Bits> out;
    const std::size_t len = fmt.frame_length();
    for (std::size_t i = 0; i + len <= bits.size(); i += len) {
        out.emplace_back(bits.begin() + i + fmt.preamble.size(), bits.begin() + i + len);
    }
    return out;
}

GestureLabel one_bit_round_trip(const GestureLabel& label, Rng& rng) {
    const tag::LightSensorModel sensor;
    const receiver::FrameFormat fmt;
    const auto trace = synthesize_gesture(label, 500.0, rng);
    return classify_1bit(payloads_of(encode_frames(trace, sensor, fmt), fmt), trace.rate_hz);
}

GestureLabel multibit_round_trip(const GestureLabel& label, Rng& rng) {
    const auto trace = synthesize_gesture(label, 200.0, rng);
    return classify_multibit(quantize_trace(trace, tag::LightSensorModel{}), trace.rate_hz);
}

}  // namespace

TEST_CASE("label text round trip", "[gesture][label]") {
    for (const char* s : {"swipe", "taps(2)", "taps(3)", "block", "swirl(cw)", "swirl(ccw)", "push", "pull",
                          "unknown"}) {
        CHECK(to_string(parse_label(s)) == s);
    }
    CHECK_THROWS_AS(parse_label("wave"), std::invalid_argument);
    CHECK_THROWS_AS(parse_label("taps(0)"), std::invalid_argument);
    CHECK(GestureLabel::tap(2) != GestureLabel::tap(3));
    CHECK(GestureLabel::swirl(SwirlDirection::cw) != GestureLabel::swirl(SwirlDirection::ccw));
}

TEST_CASE("block template holds one sensor dark", "[gesture][synth]") {
    Rng rng(1);
    const auto t = synthesize_gesture(GestureLabel::block(), 500.0, rng);
    const auto dark = (t.lux < 0.1 * 500.0);
    int sensors = 0;
    for (int s = 0; s < kSensors; ++s) {
        const auto n = dark.col(s).count();
        if (n > 0) {
            ++sensors;
            CHECK(double(n) / t.rate_hz >= 1.0);
        }
    }
    CHECK(sensors == 1);
}

TEST_CASE("swirl(cw) onsets increase across sensors", "[gesture][synth]") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t = synthesize_gesture(GestureLabel::swirl(SwirlDirection::cw), 500.0, rng);
        Eigen::Index prev = -1;
        for (int s = 0; s < kSensors; ++s) {
            Eigen::Index onset = 0;
            while (onset < t.size() && t.lux(onset, s) >= 30.0) ++onset;
            REQUIRE(onset < t.size());
            CHECK(onset > prev);
            prev = onset;
        }
    }
}

TEST_CASE("push ramps are monotone nonincreasing", "[gesture][synth]") {
    Rng rng(3);
    const auto t = synthesize_gesture(GestureLabel::push(), 500.0, rng);
    for (int s = 0; s < kSensors; ++s) {
        for (Eigen::Index i = 1; i < t.size(); ++i) CHECK(t.lux(i, s) <= t.lux(i - 1, s));
    }
    CHECK(t.lux(t.size() - 1, 0) < t.lux(0, 0));
}

TEST_CASE("synthesis rejects dark ambient", "[gesture][synth]") {
    Rng rng(4);
    CHECK_THROWS_AS(synthesize_gesture(GestureLabel::swipe(), 30.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_gesture(GestureLabel::unknown(), 500.0, rng), std::invalid_argument);
}

TEST_CASE("frame encoding", "[gesture][encode]") {
    const tag::LightSensorModel sensor;
    const receiver::FrameFormat fmt;
    LightTrace t;
    t.lux = LuxSeries::Constant(50, kSensors, 500.0);
    auto bits = encode_frames(t, sensor, fmt);
    CHECK(bits.size() == 50 * 12);
    for (const auto& p : payloads_of(bits, fmt)) CHECK(p == Bits{0, 0, 0, 0});

    t.lux.col(0).setConstant(10.0);
    t.lux.col(1).setConstant(10.0);
    bits = encode_frames(t, sensor, fmt);
    for (const auto& p : payloads_of(bits, fmt)) CHECK(p == Bits{1, 1, 0, 0});
    CHECK(Bits(bits.begin(), bits.begin() + 8) == fmt.preamble);

    receiver::FrameFormat wide = fmt;
    wide.payload_bits = 5;
    CHECK_THROWS_AS(encode_frames(t, sensor, wide), ConfigurationError);
}

TEST_CASE("encoded length is frame length times epochs", "[gesture][encode][property]") {
    Rng rng(5);
    const receiver::FrameFormat fmt;
    for (const auto& label : kOneBitLabels) {
        const auto t = synthesize_gesture(label, 500.0, rng);
        CHECK(encode_frames(t, tag::LightSensorModel{}, fmt).size() ==
              static_cast<std::size_t>(t.size()) * 12);
    }
}

TEST_CASE("one-bit round trip is exact on noise-free traces", "[gesture][classify][property]") {
    for (std::size_t l = 0; l < kOneBitLabels.size(); ++l) {
        const auto& label = kOneBitLabels[l];
        int hits = 0;
        for (int i = 0; i < 100; ++i) {
            Rng rng(derive_seed(600 + l, i));
            hits += one_bit_round_trip(label, rng) == label;
        }
        INFO(to_string(label));
        CHECK(hits == 100);
    }
}

TEST_CASE("swirl directions are never confused", "[gesture][classify][property]") {
    const auto cw = GestureLabel::swirl(SwirlDirection::cw);
    const auto ccw = GestureLabel::swirl(SwirlDirection::ccw);
    for (int i = 0; i < 100; ++i) {
        Rng rng(derive_seed(77, i));
        CHECK(one_bit_round_trip(cw, rng) != ccw);
        CHECK(one_bit_round_trip(ccw, rng) != cw);
    }
}

TEST_CASE("push and pull look identical at one bit", "[gesture][classify][property]") {
    std::set<std::string> push_labels, pull_labels;
    for (int i = 0; i < 100; ++i) {
        Rng rng(derive_seed(88, i));
        const auto a = one_bit_round_trip(GestureLabel::push(), rng);
        const auto b = one_bit_round_trip(GestureLabel::pull(), rng);
        CHECK(a == b);
        CHECK(a.kind != GestureKind::push);
        CHECK(a.kind != GestureKind::pull);
        push_labels.insert(to_string(a));
        pull_labels.insert(to_string(b));
    }
    CHECK(push_labels == pull_labels);
}

TEST_CASE("multibit separates push from pull", "[gesture][classify][property]") {
    int hits = 0;
    for (int i = 0; i < 100; ++i) {
        Rng rng(derive_seed(99, i));
        hits += multibit_round_trip(GestureLabel::push(), rng) == GestureLabel::push();
        hits += multibit_round_trip(GestureLabel::pull(), rng) == GestureLabel::pull();
    }
    CHECK(hits >= 190);
}

TEST_CASE("multibit rules keep the one-bit gestures", "[gesture][classify]") {
    for (const auto& label : kOneBitLabels) {
        for (int i = 0; i < 20; ++i) {
            Rng rng(derive_seed(321, i));
            INFO(to_string(label));
            CHECK(multibit_round_trip(label, rng) == label);
        }
    }
}

TEST_CASE("unoccluded frames classify as unknown", "[gesture][classify]") {
    const std::vector<Bits> frames(300, Bits{0, 0, 0, 0});
    CHECK(classify_1bit(frames, 200.0) == GestureLabel::unknown());
    const std::vector<Bits> bad(3, Bits{0, 0, 0});
    CHECK_THROWS_AS(classify_1bit(bad, 200.0), ConfigurationError);
}

TEST_CASE("gesture CSV formats round trip", "[gesture][csv]") {
    Rng rng(6);
    const auto t = synthesize_gesture(GestureLabel::tap(2), 500.0, rng);
    std::stringstream ss;
    write_light_trace_csv(t, ss);
    const auto back = read_light_trace_csv(ss);
    CHECK(back.rate_hz == t.rate_hz);
    CHECK(back.ambient_lux == t.ambient_lux);
    REQUIRE(back.size() == t.size());
    CHECK((back.lux - t.lux).abs().maxCoeff() < 1e-6);

    const std::vector<ClassificationRecord> recs{{"t0", GestureLabel::tap(3), GestureLabel::tap(3)},
                                                 {"t1", GestureLabel::push(), GestureLabel::unknown()}};
    std::stringstream cs;
    write_classification_csv(recs, cs);
    CHECK(cs.str() == "trace_id,expected,predicted\nt0,taps(3),taps(3)\nt1,push,unknown\n");
    const auto parsed = read_classification_csv(cs);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[1].expected == GestureLabel::push());
    CHECK(parsed[1].predicted == GestureLabel::unknown());
}
