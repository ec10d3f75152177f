#pragma once

// Edge-device reception: RSS sampling, noise-floor estimation, ASK slicing,
// noncoherent FSK, framing, and the analytic BER references.

#include "tunnelscatter/signal.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace tunnelscatter::receiver {

/// Power reported for an all-zero window.
inline constexpr double kRssFloorDbm = -200.0;

struct RssTrace {
    Eigen::ArrayXd samples_dbm;
    double rate_hz = 1.0e4;
    double bandwidth_hz = 1.0e5;

    Eigen::Index size() const noexcept { return samples_dbm.size(); }
};

struct FrameFormat {
    Bits preamble{1, 0, 1, 0, 1, 0, 1, 1};
    int payload_bits = 4;
    int max_preamble_errors = 1;

    int frame_length() const noexcept { return static_cast<int>(preamble.size()) + payload_bits; }
};

/// Throws ValidationError unless preamble >= 4 bits and payload >= 1 bit.
void validate(const FrameFormat& fmt);

/// Mean linear power per window of round(fs / rate) envelope samples,
/// reported in dBm. Trailing partial windows are dropped.
RssTrace rss_sample(const PowerEnvelope& wave, double rate_hz, double bandwidth_hz = 1.0e5);

struct NoiseEstimate {
    double floor_dbm;
    double threshold_dbm;
};

/// Floor = mean (dB) of the first `quiet_len` samples; threshold = floor +
/// max(3 sigma, 3 dB). Throws InsufficientDataError for short traces.
NoiseEstimate estimate_noise_floor(const RssTrace& trace, Eigen::Index quiet_len = 100);

/// Energy-detector OOK slicer. The bit clock starts at the first sample above
/// the threshold; each bit is the majority vote over its window (ties to 0).
Bits ask_demodulate(const RssTrace& trace, double bitrate, double threshold_dbm);

/// Noncoherent BFSK: per symbol window, |<x, tone1>|^2 > |<x, tone0>|^2
/// decides 1; equality decides 0. Symbol k starts at round(k * fs / bitrate).
Bits fsk_demodulate(const ComplexBaseband& wave, double f_sub0_hz, double f_sub1_hz,
                    double bitrate);

double analytic_ber_fsk(double ebn0_db);
double analytic_ber_ook(double ebn0_db);

/// Preamble followed by each payload, concatenated.
Bits frame_bits(std::span<const Bits> payloads, const FrameFormat& fmt);

/// Sliding preamble search (Hamming distance <= max_preamble_errors);
/// the search resumes after each extracted frame.
std::vector<Bits> deframe(std::span<const std::uint8_t> bits, const FrameFormat& fmt);

/// RSS trace CSV:
///   # rate_hz=<r> bandwidth_hz=<b>
///   sample_index,value
///   0,-124.000000
void write_rss_csv(const RssTrace& trace, std::ostream& out);
void write_rss_csv(const RssTrace& trace, const std::filesystem::path& path);
RssTrace read_rss_csv(std::istream& in);
RssTrace read_rss_csv(const std::filesystem::path& path);

}  // namespace tunnelscatter::receiver
