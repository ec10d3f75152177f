#pragma once

// Scenario configuration, experiment presets, sweeps, metrics and CSV.

#include "tunnelscatter/channel.hpp"
#include "tunnelscatter/device.hpp"
#include "tunnelscatter/receiver.hpp"
#include "tunnelscatter/tag.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tunnelscatter::harness {

enum class Mode { aclt, abt };
enum class Experiment { link, bias_sweep, drift, harvest, gestures };
enum class PathPolicy { automatic, tunnel, rf_switch };

struct TagConfig {
    std::vector<device::IVPoint> iv_curve = device::IVCurve::default_points();
    device::OscillatorModel oscillator{};
    device::ReflectionAmpModel amplifier{};
    device::EnvelopeDetectorModel detector{};
    double v_bias = 0.095;
    double conventional_loss_db = device::kDefaultSwitchLossDb;
    double subcarrier_overhead_w = 0.0;
    double switch_power_w = 0.5e-6;
    PathPolicy path_policy = PathPolicy::automatic;
    double ask_bitrate = tag::kAskBitrate;
    double envelope_rate_hz = 1.0e4;
    double fsk_bitrate = tag::kFskBitrate;
    double f_sub0_hz = tag::kFskSub0Hz;
    double f_sub1_hz = tag::kFskSub1Hz;
    double fsk_sample_rate_hz = 1.0e6;
    tag::HarvesterState harvester = tag::make_harvester(0.0);
    tag::LightSensorModel light_sensor{};
};

struct ReceiverConfig {
    channel::NoiseModel noise{};
    double rss_rate_hz = 1.0e4;
    int quiet_len = 100;
    receiver::FrameFormat frame{};
    /// SNR margin over the noise floor at which a link counts as closed.
    double required_snr_db = 10.0;
};

struct TrafficConfig {
    int frames = 200;
    // drift
    double duration_s = 6.0 * 3600.0;
    double step_s = 6.0;
    // harvest
    double lux = 500.0;
    double load_w = 0.0;
    double harvest_dt_s = 1.0;
    double harvest_horizon_s = 2.0e5;
    // gestures
    int gesture_instances = 10;
    double ambient_lux = 500.0;
    double multibit_ambient_lux = 200.0;
    std::vector<std::string> gestures{"swipe",     "taps(2)",    "taps(3)", "block",
                                      "swirl(cw)", "swirl(ccw)", "push",    "pull"};
};

struct SweepConfig {
    std::string parameter;
    std::vector<double> values;
    /// Parameters stepped jointly with `parameter`; each list matches `values`.
    std::map<std::string, std::vector<double>> coupled;
};

struct ScenarioConfig {
    std::string name = "custom";
    std::uint64_t seed = 1;
    Mode mode = Mode::aclt;
    Experiment experiment = Experiment::link;
    std::optional<double> emitter_power_dbm;
    double acs_detuning_hz = 0.0;
    channel::LinkTopology emitter_leg{};
    channel::LinkTopology receiver_leg{};
    TagConfig tag{};
    ReceiverConfig receiver{};
    TrafficConfig traffic{};
    std::optional<SweepConfig> sweep;
};

/// Throws ValidationError naming the offending key path.
void validate(const ScenarioConfig& cfg);

nlohmann::json to_json(const ScenarioConfig& cfg);
/// Strict parse: unknown keys and wrong types raise ValidationError. Missing
/// keys keep their defaults.
ScenarioConfig config_from_json(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path);

/// Sets one parameter by dotted key path (e.g. "tag.oscillator.k_v_hz_per_v",
/// "receiver_leg.obstacles.0.attenuation_db"). Virtual parameters:
///   acs_at_tag_dbm          emitter power back-computed over emitter_leg
///   <leg>.walls, <leg>.floors  replace that obstacle kind with N defaults
ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& path,
                             const nlohmann::json& value);

/// "key=value" where value is parsed as JSON, falling back to a string.
ScenarioConfig with_assignment(const ScenarioConfig& cfg, const std::string& assignment);

std::vector<std::string> preset_names();
/// Throws std::invalid_argument listing valid names for an unknown preset.
ScenarioConfig preset(std::string_view name);

struct MetricsRow {
    double sweep_value = 0.0;
    double ber = 0.0;
    long long frames_sent = 0;
    long long frames_recovered = 0;
    double rx_power_dbm = 0.0;
    double snr_db = 0.0;
    std::string selected_path;
    double energy_consumed_j = 0.0;
    std::string aux_name;
    double aux_value = 0.0;
};

struct LinkBudget {
    double acs_at_tag_dbm;  // -inf in ACLT mode
    tag::TxPath selected_path;
    bool locked;
    double tag_out_dbm;
    double alt_tag_out_dbm;  // other path; -inf when there is none
    double rx_power_dbm;
    double alt_rx_power_dbm;
    double noise_floor_dbm;
    double snr_db;
};

LinkBudget link_budget(const ScenarioConfig& cfg);

/// Emitted power of `path` for the scenario (ACLT: free-running oscillator).
double tag_output_dbm(const ScenarioConfig& cfg, tag::TxPath path);

/// Largest tag-to-receiver distance with rx >= floor + required_snr_db on
/// `path`, keeping the receiver leg's obstacles and exponent.
double closing_range_m(const ScenarioConfig& cfg, tag::TxPath path);

/// Deterministic in cfg.seed; sweep points run in parallel with
/// per-point seeds and are returned in sweep order.
std::vector<MetricsRow> run_scenario(const ScenarioConfig& cfg);

/// Runs one ACLT transmission of `bits` and returns the receiver's RSS trace
/// (the leading silence is included).
receiver::RssTrace simulate_aclt_trace(const ScenarioConfig& cfg, std::span<const std::uint8_t> bits,
                                       Rng& rng);

inline constexpr std::string_view kCsvHeader =
    "sweep_value,ber,frames_sent,frames_recovered,rx_power_dbm,snr_db,selected_path,"
    "energy_consumed_j,aux_name,aux_value";

void emit_csv(std::span<const MetricsRow> rows, std::ostream& out);
/// Throws IoError when the path cannot be written.
void emit_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::string to_csv(std::span<const MetricsRow> rows);

}  // namespace tunnelscatter::harness
