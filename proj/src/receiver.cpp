#include "tunnelscatter/receiver.hpp"

#include "tunnelscatter/channel.hpp"
#include "tunnelscatter/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace tunnelscatter::receiver {

void validate(const FrameFormat& fmt) {
    if (fmt.preamble.size() < 4) {
        throw ValidationError("frame.preamble", "must have at least 4 bits");
    }
    if (fmt.payload_bits < 1) {
        throw ValidationError("frame.payload_bits", "must be at least 1");
    }
    if (fmt.max_preamble_errors < 0) {
        throw ValidationError("frame.max_preamble_errors", "must be nonnegative");
    }
}

RssTrace rss_sample(const PowerEnvelope& wave, double rate_hz, double bandwidth_hz) {
    if (!(rate_hz > 0.0) || !(wave.sample_rate_hz >= rate_hz)) {
        throw ConfigurationError("rss_sample: envelope sample rate below the RSS rate");
    }
    RssTrace trace;
    trace.rate_hz = rate_hz;
    trace.bandwidth_hz = bandwidth_hz;

    const Eigen::Index window = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(wave.sample_rate_hz / rate_hz)));
    const Eigen::Index n = wave.size() / window;
    trace.samples_dbm.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean_mw = wave.power_mw.segment(i * window, window).mean();
        trace.samples_dbm(i) = mean_mw > 0.0 ? channel::mw_to_dbm(mean_mw) : kRssFloorDbm;
    }
    return trace;
}

NoiseEstimate estimate_noise_floor(const RssTrace& trace, Eigen::Index quiet_len) {
    if (quiet_len < 10 || trace.size() < quiet_len) {
        throw InsufficientDataError("estimate_noise_floor: need at least max(10, quiet_len) samples, "
                                    "got " + std::to_string(trace.size()));
    }
    const auto quiet = trace.samples_dbm.head(quiet_len);
    const double mean = quiet.mean();
    const double sd = std::sqrt((quiet - mean).square().sum() / double(quiet_len - 1));
    return {mean, mean + std::max(3.0 * sd, 3.0)};
}

Bits ask_demodulate(const RssTrace& trace, double bitrate, double threshold_dbm) {
    const double spb = trace.rate_hz / bitrate;
    if (!(spb >= 4.0 - 1e-9)) {
        throw ConfigurationError("ask_demodulate: need at least 4 RSS samples per bit");
    }
    const auto& s = trace.samples_dbm;
    Eigen::Index start = 0;
    while (start < s.size() && !(s(start) > threshold_dbm)) ++start;

    Bits bits;
    for (Eigen::Index k = 0;; ++k) {
        const Eigen::Index a = start + symbol_start(k, trace.rate_hz, bitrate);
        const Eigen::Index b = start + symbol_start(k + 1, trace.rate_hz, bitrate);
        if (b > s.size()) break;
        const auto above = (s.segment(a, b - a) > threshold_dbm).count();
        bits.push_back(2 * above > (b - a) ? 1 : 0);
    }
    return bits;
}

Bits fsk_demodulate(const ComplexBaseband& wave, double f_sub0_hz, double f_sub1_hz,
                    double bitrate) {
    const double fs = wave.sample_rate_hz;
    if (!(bitrate > 0.0) || !(fs >= 4.0 * std::max(std::abs(f_sub0_hz), std::abs(f_sub1_hz)))) {
        throw ConfigurationError("fsk_demodulate: sample rate must be at least 4x the highest tone");
    }
    const Eigen::Index max_len = symbol_start(1, fs, bitrate) + 1;
    Eigen::ArrayXcd tone0(max_len), tone1(max_len);
    for (Eigen::Index i = 0; i < max_len; ++i) {
        const double t = double(i) / fs;
        tone0(i) = std::polar(1.0, -2.0 * std::numbers::pi * f_sub0_hz * t);
        tone1(i) = std::polar(1.0, -2.0 * std::numbers::pi * f_sub1_hz * t);
    }

    Bits bits;
    for (Eigen::Index k = 0;; ++k) {
        const Eigen::Index a = symbol_start(k, fs, bitrate);
        const Eigen::Index b = symbol_start(k + 1, fs, bitrate);
        if (b > wave.size() || b == a) break;
        const Eigen::Index len = std::min(b - a, max_len);
        const auto x = wave.samples.segment(a, len);
        const double e0 = std::norm((x * tone0.head(len)).sum());
        const double e1 = std::norm((x * tone1.head(len)).sum());
        bits.push_back(e1 > e0 ? 1 : 0);
    }
    return bits;
}

double analytic_ber_fsk(double ebn0_db) {
    return 0.5 * std::exp(-std::pow(10.0, ebn0_db / 10.0) / 2.0);
}

double analytic_ber_ook(double ebn0_db) {
    return 0.5 * std::exp(-std::pow(10.0, ebn0_db / 10.0) / 4.0);
}

Bits frame_bits(std::span<const Bits> payloads, const FrameFormat& fmt) {
    Bits out;
    out.reserve(payloads.size() * fmt.frame_length());
    for (const auto& p : payloads) {
        out.insert(out.end(), fmt.preamble.begin(), fmt.preamble.end());
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::vector<Bits> deframe(std::span<const std::uint8_t> bits, const FrameFormat& fmt) {
    const std::size_t pre = fmt.preamble.size();
    const std::size_t len = pre + static_cast<std::size_t>(fmt.payload_bits);
    std::vector<Bits> frames;
    std::size_t i = 0;
    while (i + len <= bits.size()) {
        int errors = 0;
        for (std::size_t j = 0; j < pre && errors <= fmt.max_preamble_errors; ++j) {
            errors += (bits[i + j] != 0) != (fmt.preamble[j] != 0);
        }
        if (errors <= fmt.max_preamble_errors) {
            frames.emplace_back(bits.begin() + i + pre, bits.begin() + i + len);
            i += len;
        } else {
            ++i;
        }
    }
    return frames;
}

void write_rss_csv(const RssTrace& trace, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "# rate_hz=%.10g bandwidth_hz=%.10g\n", trace.rate_hz,
                  trace.bandwidth_hz);
    out << buf << "sample_index,value\n";
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%lld,%.10g\n", static_cast<long long>(i),
                      trace.samples_dbm(i));
        out << buf;
    }
}

void write_rss_csv(const RssTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_rss_csv(trace, out);
    if (!out) throw IoError("write failed: " + path.string());
}

RssTrace read_rss_csv(std::istream& in) {
    RssTrace trace;
    std::string line;
    if (!std::getline(in, line) ||
        std::sscanf(line.c_str(), "# rate_hz=%lf bandwidth_hz=%lf", &trace.rate_hz,
                    &trace.bandwidth_hz) != 2) {
        throw IoError("rss csv: expected '# rate_hz=<r> bandwidth_hz=<b>' header");
    }
    if (!std::getline(in, line) || line.rfind("sample_index,value", 0) != 0) {
        throw IoError("rss csv: expected 'sample_index,value' column header");
    }
    std::vector<double> values;
    long long expected = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        long long idx = 0;
        double v = 0.0;
        if (std::sscanf(line.c_str(), "%lld,%lf", &idx, &v) != 2 || idx != expected) {
            throw IoError("rss csv: malformed row " + std::to_string(expected) + ": '" + line + "'");
        }
        values.push_back(v);
        ++expected;
    }
    trace.samples_dbm = Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                                         static_cast<Eigen::Index>(values.size()));
    return trace;
}

RssTrace read_rss_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_rss_csv(in);
}

}  // namespace tunnelscatter::receiver
