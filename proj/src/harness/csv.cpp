#include "tunnelscatter/harness.hpp"

#include "tunnelscatter/errors.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace tunnelscatter::harness {

namespace {

void put_number(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << buf;
}

// Labels such as "accuracy_1bit:taps(2)" never contain commas or quotes;
// anything else is quoted.
void put_text(std::ostream& out, const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

void emit_csv(std::span<const MetricsRow> rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        put_number(out, r.sweep_value);
        out << ',';
        put_number(out, r.ber);
        out << ',' << r.frames_sent << ',' << r.frames_recovered << ',';
        put_number(out, r.rx_power_dbm);
        out << ',';
        put_number(out, r.snr_db);
        out << ',';
        put_text(out, r.selected_path);
        out << ',';
        put_number(out, r.energy_consumed_j);
        out << ',';
        put_text(out, r.aux_name);
        out << ',';
        put_number(out, r.aux_value);
        out << '\n';
    }
}

void emit_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    emit_csv(rows, out);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string to_csv(std::span<const MetricsRow> rows) {
    std::ostringstream ss;
    emit_csv(rows, ss);
    return ss.str();
}

}  // namespace tunnelscatter::harness
