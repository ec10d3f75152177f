// tunnelscatter: run scenarios, presets and sweeps; demodulate RSS traces.

#include "tunnelscatter/errors.hpp"
#include "tunnelscatter/harness.hpp"
#include "tunnelscatter/receiver.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace ts = tunnelscatter;
namespace h = tunnelscatter::harness;

namespace {

struct OutputOptions {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string trace_out;
    bool dump_config = false;
};

void add_output_options(CLI::App* cmd, OutputOptions& o) {
    cmd->add_option("--seed", o.seed, "Override the scenario seed");
    cmd->add_option("--out", o.out, "Write metrics CSV here instead of stdout");
    cmd->add_option("--trace-out", o.trace_out, "Also write the RSS trace of one ACLT burst (aclt mode)");
    cmd->add_flag("--dump-config", o.dump_config, "Print the resolved config as JSON and exit");
}

int execute(h::ScenarioConfig cfg, const OutputOptions& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.dump_config) {
        std::cout << h::to_json(cfg).dump(2) << '\n';
        return 0;
    }
    const auto rows = h::run_scenario(cfg);
    if (o.out.empty()) {
        h::emit_csv(rows, std::cout);
    } else {
        h::emit_csv(rows, std::filesystem::path(o.out));
    }

    if (!o.trace_out.empty()) {
        ts::Rng rng(ts::derive_seed(cfg.seed, 0x7261636574ULL));
        std::bernoulli_distribution coin(0.5);
        std::vector<ts::Bits> payloads(cfg.traffic.frames, ts::Bits(cfg.receiver.frame.payload_bits));
        for (auto& p : payloads) {
            for (auto& b : p) b = coin(rng) ? 1 : 0;
        }
        const auto bits = ts::receiver::frame_bits(payloads, cfg.receiver.frame);
        const auto trace = h::simulate_aclt_trace(cfg, bits, rng);
        ts::receiver::write_rss_csv(trace, std::filesystem::path(o.trace_out));
    }
    return 0;
}

std::vector<double> parse_values(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ts::ValidationError(what, "'" + item + "' is not a number");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string bits_string(std::span<const std::uint8_t> bits) {
    std::string s;
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tunnel-diode backscatter link simulator"};
    app.require_subcommand(1);

    OutputOptions run_opts, preset_opts, sweep_opts;

    auto* run = app.add_subcommand("run", "Run a scenario from a JSON config");
    std::string run_config;
    std::vector<std::string> run_sets;
    run->add_option("config", run_config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--set", run_sets, "Override a parameter: key=value (repeatable)");
    add_output_options(run, run_opts);

    auto* pre = app.add_subcommand("preset", "Run a named experiment preset");
    std::string preset_name;
    std::vector<std::string> preset_sets;
    pre->add_option("name", preset_name, "Preset name (see `presets`)")->required();
    pre->add_option("--set", preset_sets, "Override a parameter: key=value (repeatable)");
    add_output_options(pre, preset_opts);

    auto* sweep = app.add_subcommand("sweep", "Sweep one parameter of a scenario");
    std::string sweep_config, sweep_param, sweep_values;
    std::vector<std::string> sweep_coupled;
    sweep->add_option("config", sweep_config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", sweep_param, "Parameter key path")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
    sweep->add_option("--coupled", sweep_coupled, "key=v1,v2,... stepped with --param (repeatable)");
    add_output_options(sweep, sweep_opts);

    auto* demod = app.add_subcommand("demod", "Demodulate an RSS trace CSV (ASK)");
    std::string trace_path;
    double bitrate = 1000.0;
    int quiet_len = 100;
    std::optional<std::uint64_t> demod_seed;
    ts::receiver::FrameFormat fmt;
    demod->add_option("trace", trace_path, "RSS trace CSV")->required()->check(CLI::ExistingFile);
    demod->add_option("--bitrate", bitrate, "ASK bitrate in bit/s")->capture_default_str();
    demod->add_option("--quiet-len", quiet_len, "Leading noise-only samples")->capture_default_str();
    demod->add_option("--payload-bits", fmt.payload_bits, "Payload bits per frame")->capture_default_str();
    demod->add_option("--seed", demod_seed, "Accepted for uniformity; demodulation is deterministic");

    auto* list = app.add_subcommand("presets", "List preset names");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = h::load_config(run_config);
            for (const auto& s : run_sets) cfg = h::with_assignment(cfg, s);
            return execute(cfg, run_opts);
        }
        if (*pre) {
            auto cfg = h::preset(preset_name);
            for (const auto& s : preset_sets) cfg = h::with_assignment(cfg, s);
            return execute(cfg, preset_opts);
        }
        if (*sweep) {
            auto cfg = h::load_config(sweep_config);
            h::SweepConfig s;
            s.parameter = sweep_param;
            s.values = parse_values(sweep_values, "--values");
            for (const auto& c : sweep_coupled) {
                const auto eq = c.find('=');
                if (eq == std::string::npos) throw ts::ValidationError("--coupled", "expected key=v1,v2,...");
                s.coupled[c.substr(0, eq)] = parse_values(c.substr(eq + 1), "--coupled");
            }
            cfg.sweep = s;
            return execute(cfg, sweep_opts);
        }
        if (*demod) {
            const auto trace = ts::receiver::read_rss_csv(std::filesystem::path(trace_path));
            const auto est = ts::receiver::estimate_noise_floor(trace, quiet_len);
            // Same receiver as the harness: the bit clock is searched for after the quiet window.
            auto payload = trace;
            payload.samples_dbm = trace.samples_dbm.tail(trace.size() - quiet_len).eval();
            const auto bits = ts::receiver::ask_demodulate(payload, bitrate, est.threshold_dbm);
            std::cout << "noise_floor_dbm," << est.floor_dbm << '\n'
                      << "threshold_dbm," << est.threshold_dbm << '\n'
                      << "bits," << bits_string(bits) << '\n';
            for (const auto& p : ts::receiver::deframe(bits, fmt)) {
                std::cout << "frame," << bits_string(p) << '\n';
            }
            return 0;
        }
        if (*list) {
            for (const auto& n : h::preset_names()) std::cout << n << '\n';
            return 0;
        }
    } catch (const ts::ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
