#include "tunnelscatter/harness.hpp"

#include <cmath>
#include <stdexcept>

namespace tunnelscatter::harness {

namespace {

std::vector<double> stepped(double from, double to, double step, double quantum) {
    std::vector<double> out;
    const auto n = static_cast<long>(std::llround((to - from) / step));
    for (long k = 0; k <= n; ++k) {
        // Snap to the quantum so the last point equals `to` exactly.
        out.push_back(std::round((from + step * double(k)) / quantum) * quantum);
    }
    return out;
}

channel::LinkTopology leg(double distance_m, int walls = 0, int floors = 0) {
    channel::LinkTopology t;
    t.distance_m = distance_m;
    for (int i = 0; i < walls; ++i) t.obstacles.push_back(channel::Obstacle::wall());
    for (int i = 0; i < floors; ++i) t.obstacles.push_back(channel::Obstacle::floor());
    return t;
}

ScenarioConfig base(const char* name, Mode mode, Experiment experiment) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.seed = 1;
    cfg.mode = mode;
    cfg.experiment = experiment;
    return cfg;
}

ScenarioConfig aclt_walls() {
    auto cfg = base("aclt_walls", Mode::aclt, Experiment::link);
    cfg.receiver_leg = leg(3.0);
    cfg.sweep = SweepConfig{"receiver_leg.distance_m",
                            {3, 6, 10, 14, 18, 22, 26, 30},
                            {{"receiver_leg.walls", {0, 1, 1, 2, 3, 3, 4, 5}}}};
    return cfg;
}

ScenarioConfig walls18m() {
    auto cfg = base("walls18m", Mode::aclt, Experiment::link);
    cfg.receiver_leg = leg(18.0, 3);
    return cfg;
}

ScenarioConfig abt_multifloor() {
    auto cfg = base("abt_multifloor", Mode::abt, Experiment::link);
    cfg.emitter_power_dbm = -27.0;
    cfg.emitter_leg = leg(1.0);
    cfg.receiver_leg = leg(1.0);
    cfg.traffic.frames = 50;
    cfg.sweep = SweepConfig{"receiver_leg.floors",
                            {0, 1, 2, 3, 4},
                            {{"receiver_leg.distance_m", {1.0, 3.5, 7.0, 10.5, 14.0}}}};
    return cfg;
}

ScenarioConfig abt_walls() {
    auto cfg = base("abt_walls", Mode::abt, Experiment::link);
    cfg.emitter_power_dbm = 16.0;
    cfg.emitter_leg = leg(30.0, 7);
    cfg.receiver_leg = leg(1.0, 3);
    cfg.traffic.frames = 50;
    cfg.sweep = SweepConfig{"receiver_leg.distance_m", {1, 2, 3, 5, 7.5, 10, 12.5, 15}, {}};
    return cfg;
}

ScenarioConfig switchover() {
    auto cfg = base("switchover", Mode::abt, Experiment::link);
    cfg.emitter_leg = leg(1.0);
    cfg.emitter_power_dbm = -40.0 + channel::path_loss(cfg.emitter_leg);
    cfg.receiver_leg = leg(4.0);
    cfg.traffic.frames = 50;
    cfg.sweep = SweepConfig{"acs_at_tag_dbm", stepped(-60.0, -10.0, 1.0, 1.0), {}};
    return cfg;
}

ScenarioConfig weak_acs_range() {
    auto cfg = base("weak_acs_range", Mode::abt, Experiment::link);
    cfg.emitter_power_dbm = -27.0;
    cfg.emitter_leg = leg(1.0);
    cfg.receiver_leg = leg(1.0);
    cfg.traffic.frames = 50;
    cfg.sweep = SweepConfig{"receiver_leg.distance_m", {1, 2, 3, 5, 10, 20, 30, 50}, {}};
    return cfg;
}

ScenarioConfig bias_sweep() {
    auto cfg = base("bias_sweep", Mode::aclt, Experiment::bias_sweep);
    cfg.sweep = SweepConfig{"tag.v_bias", stepped(0.095, 0.150, 0.005, 1e-3), {}};
    return cfg;
}

ScenarioConfig drift() {
    auto cfg = base("drift", Mode::aclt, Experiment::drift);
    cfg.traffic.duration_s = 6.0 * 3600.0;
    cfg.traffic.step_s = 6.0;
    return cfg;
}

ScenarioConfig harvest() {
    auto cfg = base("harvest", Mode::aclt, Experiment::harvest);
    cfg.sweep = SweepConfig{"traffic.lux", {50, 100, 200, 500, 1000, 2000}, {}};
    return cfg;
}

ScenarioConfig gestures() {
    auto cfg = base("gestures", Mode::aclt, Experiment::gestures);
    cfg.receiver_leg = leg(3.0);
    cfg.traffic.gesture_instances = 10;
    return cfg;
}

struct Entry {
    const char* name;
    ScenarioConfig (*make)();
};

constexpr Entry kPresets[] = {
    {"aclt_walls", aclt_walls},   {"walls18m", walls18m},     {"abt_multifloor", abt_multifloor},
    {"abt_walls", abt_walls},     {"switchover", switchover}, {"weak_acs_range", weak_acs_range},
    {"bias_sweep", bias_sweep},   {"drift", drift},           {"harvest", harvest},
    {"gestures", gestures},
};

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& e : kPresets) out.emplace_back(e.name);
    return out;
}

ScenarioConfig preset(std::string_view name) {
    for (const auto& e : kPresets) {
        if (name == e.name) return e.make();
    }
    std::string valid;
    for (const auto& e : kPresets) valid += valid.empty() ? e.name : std::string(", ") + e.name;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'; valid presets: " + valid);
}

}  // namespace tunnelscatter::harness
