#include "tunnelscatter/channel.hpp"

#include <cmath>
#include <string>

namespace tunnelscatter::channel {

void validate(const LinkTopology& topo, const std::string& where) {
    if (!(topo.distance_m > 0.0)) {
        throw ValidationError(where + ".distance_m", "must be positive");
    }
    if (!(topo.center_freq_hz > 0.0)) {
        throw ValidationError(where + ".center_freq_hz", "must be positive");
    }
    if (!(topo.path_loss_exponent >= 0.0)) {
        throw ValidationError(where + ".path_loss_exponent", "must be nonnegative");
    }
    for (std::size_t i = 0; i < topo.obstacles.size(); ++i) {
        if (!(topo.obstacles[i].attenuation_db >= 0.0)) {
            throw ValidationError(where + ".obstacles." + std::to_string(i) + ".attenuation_db",
                                  "must be nonnegative");
        }
    }
}

namespace {

double obstacle_loss(const LinkTopology& topo) {
    double sum = 0.0;
    for (const auto& o : topo.obstacles) sum += o.attenuation_db;
    return sum;
}

double distance_independent_loss(const LinkTopology& topo) {
    return 20.0 * std::log10(topo.center_freq_hz) - kFreeSpaceConstantDb + obstacle_loss(topo);
}

}  // namespace

double path_loss(const LinkTopology& topo) {
    return distance_independent_loss(topo) +
           10.0 * topo.path_loss_exponent * std::log10(topo.distance_m);
}

double noise_floor(const NoiseModel& noise) {
    if (!(noise.bandwidth_hz > 0.0)) {
        throw ConfigurationError("noise_floor: bandwidth must be positive");
    }
    return -174.0 + 10.0 * std::log10(noise.bandwidth_hz) + noise.noise_figure_db;
}

NoiseModel noise_model_for_floor(double floor_dbm, double bandwidth_hz) {
    NoiseModel m{0.0, bandwidth_hz};
    m.noise_figure_db = floor_dbm - noise_floor(m);
    return m;
}

double closing_range_m(double p_tx_dbm, const LinkTopology& topo, double threshold_dbm) {
    const double budget = p_tx_dbm - threshold_dbm - distance_independent_loss(topo);
    if (topo.path_loss_exponent == 0.0) {
        return budget >= 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return std::pow(10.0, budget / (10.0 * topo.path_loss_exponent));
}

}  // namespace tunnelscatter::channel
