#include "tunnelscatter/harness.hpp"

#include "tunnelscatter/errors.hpp"
#include "tunnelscatter/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tunnelscatter::harness {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// enum <-> string
// ---------------------------------------------------------------------------

const char* mode_name(Mode m) { return m == Mode::aclt ? "aclt" : "abt"; }

const char* experiment_name(Experiment e) {
    switch (e) {
        case Experiment::link: return "link";
        case Experiment::bias_sweep: return "bias_sweep";
        case Experiment::drift: return "drift";
        case Experiment::harvest: return "harvest";
        case Experiment::gestures: return "gestures";
    }
    return "link";
}

const char* policy_name(PathPolicy p) {
    switch (p) {
        case PathPolicy::automatic: return "auto";
        case PathPolicy::tunnel: return "tunnel";
        case PathPolicy::rf_switch: return "rf_switch";
    }
    return "auto";
}

const char* obstacle_name(channel::ObstacleKind k) {
    return k == channel::ObstacleKind::wall ? "wall" : "floor";
}

std::string bits_to_string(const Bits& bits) {
    std::string s;
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

// ---------------------------------------------------------------------------
// strict object reader
// ---------------------------------------------------------------------------

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(where(), "expected an object");
    }

    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ValidationError(key_path(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ValidationError(key_path(key), "expected an integer");
            out = v->get<Int>();
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ValidationError(key_path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ValidationError(key_path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    template <typename Enum>
    void choice(const std::string& key, Enum& out,
                std::initializer_list<std::pair<const char*, Enum>> options) {
        std::string s;
        string(key, s);
        if (s.empty() && !j_.contains(key)) return;
        std::string valid;
        for (const auto& [name, value] : options) {
            if (s == name) {
                out = value;
                return;
            }
            valid += valid.empty() ? name : std::string(", ") + name;
        }
        throw ValidationError(key_path(key), "'" + s + "' is not one of: " + valid);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ValidationError(key_path(it.key()), "unknown key");
        }
    }

private:
    std::string where() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// to_json pieces
// ---------------------------------------------------------------------------

json topology_json(const channel::LinkTopology& t) {
    json obstacles = json::array();
    for (const auto& o : t.obstacles) {
        obstacles.push_back({{"kind", obstacle_name(o.kind)}, {"attenuation_db", o.attenuation_db}});
    }
    return {{"distance_m", t.distance_m},
            {"obstacles", obstacles},
            {"center_freq_hz", t.center_freq_hz},
            {"path_loss_exponent", t.path_loss_exponent}};
}

json tag_json(const TagConfig& t) {
    json iv = json::array();
    for (const auto& p : t.iv_curve) iv.push_back({p.voltage, p.current});
    const auto& o = t.oscillator;
    const auto& a = t.amplifier;
    const auto& h = t.harvester;
    const auto& l = t.light_sensor;
    return {
        {"iv_curve", iv},
        {"oscillator",
         {{"f_ref_hz", o.f_ref_hz},
          {"v_ref", o.v_ref},
          {"k_v_hz_per_v", o.k_v_hz_per_v},
          {"p_out_dbm", o.p_out_dbm},
          {"region", {{"v_lo", o.region.v_lo}, {"v_hi", o.region.v_hi}}},
          {"drift",
           {{"stationary_std_hz", o.drift.stationary_std_hz},
            {"reversion_time_s", o.drift.reversion_time_s},
            {"current_offset_hz", o.drift.current_offset_hz}}}}},
        {"amplifier",
         {{"g_max_db", a.g_max_db},
          {"p_sat_dbm", a.p_sat_dbm},
          {"q_factor", a.q_factor},
          {"p_osc_dbm", a.p_osc_dbm},
          {"f_center_hz", a.f_center_hz}}},
        {"detector",
         {{"sensitivity_dbm", t.detector.sensitivity_dbm},
          {"hysteresis_db", t.detector.hysteresis_db},
          {"strong", t.detector.strong}}},
        {"v_bias", t.v_bias},
        {"conventional_loss_db", t.conventional_loss_db},
        {"subcarrier_overhead_w", t.subcarrier_overhead_w},
        {"switch_power_w", t.switch_power_w},
        {"path_policy", policy_name(t.path_policy)},
        {"ask_bitrate", t.ask_bitrate},
        {"envelope_rate_hz", t.envelope_rate_hz},
        {"fsk_bitrate", t.fsk_bitrate},
        {"f_sub0_hz", t.f_sub0_hz},
        {"f_sub1_hz", t.f_sub1_hz},
        {"fsk_sample_rate_hz", t.fsk_sample_rate_hz},
        {"harvester",
         {{"cap_voltage", h.cap_voltage},
          {"capacitance_f", h.capacitance_f},
          {"cold_start_v", h.cold_start_v},
          {"max_v", h.max_v},
          {"harvest_coeff_w_per_lux", h.harvest_coeff_w_per_lux},
          {"cold_efficiency", h.cold_efficiency}}},
        {"light_sensor",
         {{"responsivity_a_per_lux", l.responsivity_a_per_lux},
          {"r_high", l.r_high},
          {"r_low", l.r_low},
          {"v_supply", l.v_supply},
          {"passive_threshold_lux", l.passive_threshold_lux},
          {"detect_threshold_v", l.detect_threshold_v},
          {"switch_to_low_lux", l.switch_to_low_lux},
          {"switch_to_high_lux", l.switch_to_high_lux},
          {"gain_state", l.gain_state == tag::Gain::high ? "high" : "low"}}},
    };
}

// ---------------------------------------------------------------------------
// from_json pieces
// ---------------------------------------------------------------------------

channel::LinkTopology read_topology(const json& j, const std::string& path) {
    channel::LinkTopology t;
    Reader r(j, path);
    r.number("distance_m", t.distance_m);
    r.number("center_freq_hz", t.center_freq_hz);
    r.number("path_loss_exponent", t.path_loss_exponent);
    if (const json* obs = r.find("obstacles")) {
        if (!obs->is_array()) throw ValidationError(r.key_path("obstacles"), "expected an array");
        for (std::size_t i = 0; i < obs->size(); ++i) {
            Reader o((*obs)[i], r.key_path("obstacles") + "." + std::to_string(i));
            channel::Obstacle ob = channel::Obstacle::wall();
            o.choice("kind", ob.kind,
                     {{"wall", channel::ObstacleKind::wall}, {"floor", channel::ObstacleKind::floor}});
            ob.attenuation_db = ob.kind == channel::ObstacleKind::wall ? 12.0 : 20.0;
            o.number("attenuation_db", ob.attenuation_db);
            o.finish();
            t.obstacles.push_back(ob);
        }
    }
    r.finish();
    return t;
}

void read_tag(const json& j, TagConfig& t) {
    Reader r(j, "tag");
    if (const json* iv = r.find("iv_curve")) {
        if (!iv->is_array()) throw ValidationError("tag.iv_curve", "expected an array of [v, i]");
        t.iv_curve.clear();
        for (const auto& p : *iv) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ValidationError("tag.iv_curve", "expected an array of [v, i] number pairs");
            }
            t.iv_curve.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
    if (const json* o = r.find("oscillator")) {
        Reader ro(*o, "tag.oscillator");
        auto& m = t.oscillator;
        ro.number("f_ref_hz", m.f_ref_hz);
        ro.number("v_ref", m.v_ref);
        ro.number("k_v_hz_per_v", m.k_v_hz_per_v);
        ro.number("p_out_dbm", m.p_out_dbm);
        if (const json* reg = ro.find("region")) {
            Reader rr(*reg, "tag.oscillator.region");
            rr.number("v_lo", m.region.v_lo);
            rr.number("v_hi", m.region.v_hi);
            rr.finish();
        }
        if (const json* d = ro.find("drift")) {
            Reader rd(*d, "tag.oscillator.drift");
            rd.number("stationary_std_hz", m.drift.stationary_std_hz);
            rd.number("reversion_time_s", m.drift.reversion_time_s);
            rd.number("current_offset_hz", m.drift.current_offset_hz);
            rd.finish();
        }
        ro.finish();
    }
    if (const json* a = r.find("amplifier")) {
        Reader ra(*a, "tag.amplifier");
        ra.number("g_max_db", t.amplifier.g_max_db);
        ra.number("p_sat_dbm", t.amplifier.p_sat_dbm);
        ra.number("q_factor", t.amplifier.q_factor);
        ra.number("p_osc_dbm", t.amplifier.p_osc_dbm);
        ra.number("f_center_hz", t.amplifier.f_center_hz);
        ra.finish();
    }
    if (const json* d = r.find("detector")) {
        Reader rd(*d, "tag.detector");
        rd.number("sensitivity_dbm", t.detector.sensitivity_dbm);
        rd.number("hysteresis_db", t.detector.hysteresis_db);
        rd.boolean("strong", t.detector.strong);
        rd.finish();
    }
    r.number("v_bias", t.v_bias);
    r.number("conventional_loss_db", t.conventional_loss_db);
    r.number("subcarrier_overhead_w", t.subcarrier_overhead_w);
    r.number("switch_power_w", t.switch_power_w);
    r.choice("path_policy", t.path_policy,
             {{"auto", PathPolicy::automatic},
              {"tunnel", PathPolicy::tunnel},
              {"rf_switch", PathPolicy::rf_switch}});
    r.number("ask_bitrate", t.ask_bitrate);
    r.number("envelope_rate_hz", t.envelope_rate_hz);
    r.number("fsk_bitrate", t.fsk_bitrate);
    r.number("f_sub0_hz", t.f_sub0_hz);
    r.number("f_sub1_hz", t.f_sub1_hz);
    r.number("fsk_sample_rate_hz", t.fsk_sample_rate_hz);
    if (const json* h = r.find("harvester")) {
        Reader rh(*h, "tag.harvester");
        auto& s = t.harvester;
        rh.number("cap_voltage", s.cap_voltage);
        rh.number("capacitance_f", s.capacitance_f);
        rh.number("cold_start_v", s.cold_start_v);
        rh.number("max_v", s.max_v);
        rh.number("harvest_coeff_w_per_lux", s.harvest_coeff_w_per_lux);
        rh.number("cold_efficiency", s.cold_efficiency);
        rh.finish();
        s.mode = s.cap_voltage < s.cold_start_v ? tag::HarvesterMode::cold : tag::HarvesterMode::normal;
    }
    if (const json* l = r.find("light_sensor")) {
        Reader rl(*l, "tag.light_sensor");
        auto& m = t.light_sensor;
        rl.number("responsivity_a_per_lux", m.responsivity_a_per_lux);
        rl.number("r_high", m.r_high);
        rl.number("r_low", m.r_low);
        rl.number("v_supply", m.v_supply);
        rl.number("passive_threshold_lux", m.passive_threshold_lux);
        rl.number("detect_threshold_v", m.detect_threshold_v);
        rl.number("switch_to_low_lux", m.switch_to_low_lux);
        rl.number("switch_to_high_lux", m.switch_to_high_lux);
        rl.choice("gain_state", m.gain_state, {{"high", tag::Gain::high}, {"low", tag::Gain::low}});
        rl.finish();
    }
    r.finish();
}

void read_receiver(const json& j, ReceiverConfig& rc) {
    Reader r(j, "receiver");
    if (const json* n = r.find("noise")) {
        Reader rn(*n, "receiver.noise");
        rn.number("noise_figure_db", rc.noise.noise_figure_db);
        rn.number("bandwidth_hz", rc.noise.bandwidth_hz);
        rn.finish();
    }
    r.number("rss_rate_hz", rc.rss_rate_hz);
    r.integer("quiet_len", rc.quiet_len);
    r.number("required_snr_db", rc.required_snr_db);
    if (const json* f = r.find("frame")) {
        Reader rf(*f, "receiver.frame");
        std::string preamble;
        rf.string("preamble", preamble);
        if (f->contains("preamble")) {
            if (preamble.find_first_not_of("01") != std::string::npos) {
                throw ValidationError("receiver.frame.preamble", "expected a string of 0 and 1");
            }
            rc.frame.preamble.clear();
            for (char c : preamble) rc.frame.preamble.push_back(c == '1');
        }
        rf.integer("payload_bits", rc.frame.payload_bits);
        rf.integer("max_preamble_errors", rc.frame.max_preamble_errors);
        rf.finish();
    }
    r.finish();
}

void read_traffic(const json& j, TrafficConfig& t) {
    Reader r(j, "traffic");
    r.integer("frames", t.frames);
    r.number("duration_s", t.duration_s);
    r.number("step_s", t.step_s);
    r.number("lux", t.lux);
    r.number("load_w", t.load_w);
    r.number("harvest_dt_s", t.harvest_dt_s);
    r.number("harvest_horizon_s", t.harvest_horizon_s);
    r.integer("gesture_instances", t.gesture_instances);
    r.number("ambient_lux", t.ambient_lux);
    r.number("multibit_ambient_lux", t.multibit_ambient_lux);
    if (const json* g = r.find("gestures")) {
        if (!g->is_array()) throw ValidationError("traffic.gestures", "expected an array of labels");
        t.gestures.clear();
        for (const auto& s : *g) {
            if (!s.is_string()) throw ValidationError("traffic.gestures", "expected label strings");
            t.gestures.push_back(s.get<std::string>());
        }
    }
    r.finish();
}

std::vector<double> read_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ValidationError(path, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

SweepConfig read_sweep(const json& j) {
    SweepConfig s;
    Reader r(j, "sweep");
    r.string("parameter", s.parameter);
    if (const json* v = r.find("values")) s.values = read_numbers(*v, "sweep.values");
    if (const json* c = r.find("coupled")) {
        if (!c->is_object()) throw ValidationError("sweep.coupled", "expected an object");
        for (auto it = c->begin(); it != c->end(); ++it) {
            s.coupled[it.key()] = read_numbers(it.value(), "sweep.coupled." + it.key());
        }
    }
    r.finish();
    return s;
}

void set_obstacle_count(channel::LinkTopology& t, channel::ObstacleKind kind, int n) {
    std::erase_if(t.obstacles, [kind](const channel::Obstacle& o) { return o.kind == kind; });
    for (int i = 0; i < n; ++i) {
        t.obstacles.push_back(kind == channel::ObstacleKind::wall ? channel::Obstacle::wall()
                                                                 : channel::Obstacle::floor());
    }
}

}  // namespace

json to_json(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    j["mode"] = mode_name(cfg.mode);
    j["experiment"] = experiment_name(cfg.experiment);
    j["emitter_power_dbm"] = cfg.emitter_power_dbm ? json(*cfg.emitter_power_dbm) : json(nullptr);
    j["acs_detuning_hz"] = cfg.acs_detuning_hz;
    j["emitter_leg"] = topology_json(cfg.emitter_leg);
    j["receiver_leg"] = topology_json(cfg.receiver_leg);
    j["tag"] = tag_json(cfg.tag);
    const auto& rc = cfg.receiver;
    j["receiver"] = {{"noise",
                      {{"noise_figure_db", rc.noise.noise_figure_db},
                       {"bandwidth_hz", rc.noise.bandwidth_hz}}},
                     {"rss_rate_hz", rc.rss_rate_hz},
                     {"quiet_len", rc.quiet_len},
                     {"required_snr_db", rc.required_snr_db},
                     {"frame",
                      {{"preamble", bits_to_string(rc.frame.preamble)},
                       {"payload_bits", rc.frame.payload_bits},
                       {"max_preamble_errors", rc.frame.max_preamble_errors}}}};
    const auto& t = cfg.traffic;
    j["traffic"] = {{"frames", t.frames},
                    {"duration_s", t.duration_s},
                    {"step_s", t.step_s},
                    {"lux", t.lux},
                    {"load_w", t.load_w},
                    {"harvest_dt_s", t.harvest_dt_s},
                    {"harvest_horizon_s", t.harvest_horizon_s},
                    {"gesture_instances", t.gesture_instances},
                    {"ambient_lux", t.ambient_lux},
                    {"multibit_ambient_lux", t.multibit_ambient_lux},
                    {"gestures", t.gestures}};
    if (cfg.sweep) {
        json coupled = json::object();
        for (const auto& [k, v] : cfg.sweep->coupled) coupled[k] = v;
        j["sweep"] = {{"parameter", cfg.sweep->parameter},
                      {"values", cfg.sweep->values},
                      {"coupled", coupled}};
    } else {
        j["sweep"] = nullptr;
    }
    return j;
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig cfg;
    Reader r(j, "");
    r.string("name", cfg.name);
    r.integer("seed", cfg.seed);
    r.choice("mode", cfg.mode, {{"aclt", Mode::aclt}, {"abt", Mode::abt}});
    r.choice("experiment", cfg.experiment,
             {{"link", Experiment::link},
              {"bias_sweep", Experiment::bias_sweep},
              {"drift", Experiment::drift},
              {"harvest", Experiment::harvest},
              {"gestures", Experiment::gestures}});
    if (const json* e = r.find("emitter_power_dbm"); e && !e->is_null()) {
        if (!e->is_number()) throw ValidationError("emitter_power_dbm", "expected a number or null");
        cfg.emitter_power_dbm = e->get<double>();
    }
    r.number("acs_detuning_hz", cfg.acs_detuning_hz);
    if (const json* t = r.find("emitter_leg")) cfg.emitter_leg = read_topology(*t, "emitter_leg");
    if (const json* t = r.find("receiver_leg")) cfg.receiver_leg = read_topology(*t, "receiver_leg");
    if (const json* t = r.find("tag")) read_tag(*t, cfg.tag);
    if (const json* t = r.find("receiver")) read_receiver(*t, cfg.receiver);
    if (const json* t = r.find("traffic")) read_traffic(*t, cfg.traffic);
    if (const json* s = r.find("sweep"); s && !s->is_null()) cfg.sweep = read_sweep(*s);
    r.finish();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json(cfg).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& path,
                             const json& value) {
    if (path == "acs_at_tag_dbm") {
        if (cfg.mode != Mode::abt) throw ValidationError(path, "only meaningful in abt mode");
        if (!value.is_number()) throw ValidationError(path, "expected a number");
        ScenarioConfig out = cfg;
        out.emitter_power_dbm = value.get<double>() + channel::path_loss(cfg.emitter_leg);
        return out;
    }
    for (const char* leg : {"emitter_leg", "receiver_leg"}) {
        for (auto kind : {channel::ObstacleKind::wall, channel::ObstacleKind::floor}) {
            const std::string virt = std::string(leg) + "." + obstacle_name(kind) + "s";
            if (path != virt) continue;
            if (!value.is_number() || value.get<double>() < 0.0 ||
                value.get<double>() != std::floor(value.get<double>())) {
                throw ValidationError(path, "expected a nonnegative whole number");
            }
            ScenarioConfig out = cfg;
            auto& topo = std::string(leg) == "emitter_leg" ? out.emitter_leg : out.receiver_leg;
            set_obstacle_count(topo, kind, static_cast<int>(value.get<double>()));
            return out;
        }
    }

    json j = to_json(cfg);
    json* node = &j;
    std::stringstream ss(path);
    std::string seg;
    while (std::getline(ss, seg, '.')) {
        if (node->is_object()) {
            auto it = node->find(seg);
            if (it == node->end()) throw ValidationError(path, "unknown parameter");
            node = &*it;
        } else if (node->is_array()) {
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoul(seg, &used);
                if (used != seg.size()) throw std::invalid_argument(seg);
            } catch (const std::exception&) {
                throw ValidationError(path, "expected an array index at '" + seg + "'");
            }
            if (idx >= node->size()) throw ValidationError(path, "array index out of range");
            node = &(*node)[idx];
        } else {
            throw ValidationError(path, "cannot descend into a scalar at '" + seg + "'");
        }
    }
    *node = value;
    return config_from_json(j);
}

ScenarioConfig with_assignment(const ScenarioConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ValidationError(assignment, "expected key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    return with_override(cfg, key, value);
}

void validate(const ScenarioConfig& cfg) {
    if (cfg.mode == Mode::aclt && cfg.emitter_power_dbm) {
        throw ValidationError("emitter_power_dbm", "aclt mode must not specify an emitter");
    }
    if (cfg.mode == Mode::abt && !cfg.emitter_power_dbm) {
        throw ValidationError("emitter_power_dbm", "abt mode requires an emitter");
    }
    if (cfg.mode == Mode::abt) channel::validate(cfg.emitter_leg, "emitter_leg");
    channel::validate(cfg.receiver_leg, "receiver_leg");

    const auto& t = cfg.tag;
    std::optional<device::IVCurve> curve;
    try {
        curve.emplace(t.iv_curve);
        device::validate(t.oscillator.region, *curve);
    } catch (const ConfigurationError& e) {
        throw ValidationError(std::string(e.what()).rfind("Region", 0) == 0 ? "tag.oscillator.region"
                                                                            : "tag.iv_curve",
                              e.what());
    }
    if (t.v_bias < t.oscillator.region.v_lo || t.v_bias > t.oscillator.region.v_hi) {
        throw ValidationError("tag.v_bias", "bias outside the region of interest (diode would not "
                                            "oscillate)");
    }
    if (!(t.oscillator.drift.reversion_time_s > 0.0) || t.oscillator.drift.stationary_std_hz < 0.0) {
        throw ValidationError("tag.oscillator.drift", "need reversion_time_s > 0, stationary_std_hz >= 0");
    }
    if (!(t.amplifier.q_factor > 0.0)) throw ValidationError("tag.amplifier.q_factor", "must be positive");
    if (!(t.detector.hysteresis_db >= 0.0)) {
        throw ValidationError("tag.detector.hysteresis_db", "must be nonnegative");
    }
    if (!(t.ask_bitrate > 0.0)) throw ValidationError("tag.ask_bitrate", "must be positive");
    if (!(t.envelope_rate_hz >= 10.0 * t.ask_bitrate)) {
        throw ValidationError("tag.envelope_rate_hz", "must be at least 10x tag.ask_bitrate");
    }
    if (!(t.fsk_bitrate > 0.0)) throw ValidationError("tag.fsk_bitrate", "must be positive");
    if (!(t.fsk_sample_rate_hz >= 4.0 * std::max(std::abs(t.f_sub0_hz), std::abs(t.f_sub1_hz)))) {
        throw ValidationError("tag.fsk_sample_rate_hz", "must be at least 4x the highest subcarrier");
    }
    if (t.f_sub0_hz == t.f_sub1_hz) throw ValidationError("tag.f_sub1_hz", "tones must differ");
    if (!(t.harvester.capacitance_f > 0.0)) {
        throw ValidationError("tag.harvester.capacitance_f", "must be positive");
    }
    if (!(t.harvester.cap_voltage >= 0.0 && t.harvester.cap_voltage <= t.harvester.max_v)) {
        throw ValidationError("tag.harvester.cap_voltage", "must lie in [0, max_v]");
    }

    const auto& rc = cfg.receiver;
    if (!(rc.noise.bandwidth_hz > 0.0)) {
        throw ValidationError("receiver.noise.bandwidth_hz", "must be positive");
    }
    if (!(rc.rss_rate_hz > 0.0) || rc.rss_rate_hz > t.envelope_rate_hz) {
        throw ValidationError("receiver.rss_rate_hz", "must be positive and at most tag.envelope_rate_hz");
    }
    if (rc.rss_rate_hz / t.ask_bitrate < 4.0) {
        throw ValidationError("receiver.rss_rate_hz", "need at least 4 RSS samples per ASK bit");
    }
    if (rc.quiet_len < 10) throw ValidationError("receiver.quiet_len", "must be at least 10");
    try {
        receiver::validate(rc.frame);
    } catch (const ValidationError& e) {
        throw ValidationError("receiver." + e.field(), e.what());
    }

    const auto& tr = cfg.traffic;
    if (cfg.experiment == Experiment::link && tr.frames < 1) {
        throw ValidationError("traffic.frames", "must be at least 1");
    }
    if (!(tr.step_s > 0.0)) throw ValidationError("traffic.step_s", "must be positive");
    if (!(tr.duration_s >= 0.0)) throw ValidationError("traffic.duration_s", "must be nonnegative");
    if (!(tr.lux >= 0.0)) throw ValidationError("traffic.lux", "must be nonnegative");
    if (!(tr.load_w >= 0.0)) throw ValidationError("traffic.load_w", "must be nonnegative");
    if (!(tr.harvest_dt_s > 0.0)) throw ValidationError("traffic.harvest_dt_s", "must be positive");
    if (cfg.experiment == Experiment::gestures) {
        if (rc.frame.payload_bits != gesture::kSensors) {
            throw ValidationError("receiver.frame.payload_bits", "gesture frames carry 4 bits");
        }
        if (tr.gesture_instances < 1) {
            throw ValidationError("traffic.gesture_instances", "must be at least 1");
        }
        for (const auto& g : tr.gestures) {
            try {
                if (gesture::parse_label(g).kind == gesture::GestureKind::unknown) {
                    throw std::invalid_argument("unknown");
                }
            } catch (const std::invalid_argument&) {
                throw ValidationError("traffic.gestures", "'" + g + "' is not a gesture label");
            }
        }
        if (!(tr.ambient_lux > t.light_sensor.passive_threshold_lux)) {
            throw ValidationError("traffic.ambient_lux", "must exceed the passive threshold");
        }
        if (!(tr.multibit_ambient_lux > t.light_sensor.passive_threshold_lux)) {
            throw ValidationError("traffic.multibit_ambient_lux", "must exceed the passive threshold");
        }
    }

    if (cfg.sweep) {
        const auto& s = *cfg.sweep;
        if (cfg.experiment == Experiment::drift) {
            throw ValidationError("sweep", "the drift experiment is a time series and takes no sweep");
        }
        if (s.parameter.empty()) throw ValidationError("sweep.parameter", "must name a parameter");
        if (s.values.empty()) throw ValidationError("sweep.values", "must not be empty");
        for (const auto& [k, v] : s.coupled) {
            if (v.size() != s.values.size()) {
                throw ValidationError("sweep.coupled." + k, "length must match sweep.values");
            }
        }
        // Every point must itself be a valid scenario.
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            ScenarioConfig point = cfg;
            point.sweep.reset();
            try {
                point = with_override(point, s.parameter, s.values[i]);
                for (const auto& [k, v] : s.coupled) point = with_override(point, k, v[i]);
            } catch (const ValidationError& e) {
                throw ValidationError("sweep.parameter", e.what());
            }
            try {
                validate(point);
            } catch (const ValidationError& e) {
                throw ValidationError(e.field(), std::string("at sweep point ") + std::to_string(i) +
                                                     ": " + e.what());
            }
        }
    }
}

}  // namespace tunnelscatter::harness
