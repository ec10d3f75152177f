#pragma once

// Propagation and noise: unit conversions, log-distance path loss with
// per-obstacle attenuation, thermal noise floor, and sample-level
// attenuation plus AWGN.

#include "tunnelscatter/errors.hpp"
#include "tunnelscatter/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace tunnelscatter::channel {

enum class ObstacleKind { wall, floor };

struct Obstacle {
    ObstacleKind kind = ObstacleKind::wall;
    double attenuation_db = 12.0;

    static Obstacle wall(double db = 12.0) { return {ObstacleKind::wall, db}; }
    static Obstacle floor(double db = 20.0) { return {ObstacleKind::floor, db}; }
};

struct LinkTopology {
    double distance_m = 1.0;
    std::vector<Obstacle> obstacles;
    double center_freq_hz = 868e6;
    double path_loss_exponent = 2.0;
};

/// Throws ValidationError (field prefixed by `where`) on a bad topology.
void validate(const LinkTopology& topo, const std::string& where = "topology");

struct NoiseModel {
    double noise_figure_db = 0.0;
    double bandwidth_hz = 1.0e5;

    /// Noise-free model: the floor is -inf dBm and propagate adds nothing.
    static NoiseModel none(double bandwidth_hz = 1.0e5) {
        return {-std::numeric_limits<double>::infinity(), bandwidth_hz};
    }
};

inline double dbm_to_mw(double p_dbm) { return std::pow(10.0, p_dbm / 10.0); }

inline double mw_to_dbm(double p_mw) {
    if (!(p_mw > 0.0)) {
        throw DomainError("mw_to_dbm: power must be positive");
    }
    return 10.0 * std::log10(p_mw);
}

/// Free-space constant: 20 log10(4 pi / c) in dB, so that exponent 2 at 1 m
/// reproduces the Friis loss.
inline constexpr double kFreeSpaceConstantDb = 147.55;

double path_loss(const LinkTopology& topo);

inline double received_power(double p_tx_dbm, const LinkTopology& topo) {
    return p_tx_dbm - path_loss(topo);
}

double noise_floor(const NoiseModel& noise);

/// Noise model over `bandwidth_hz` whose floor equals `floor_dbm`.
NoiseModel noise_model_for_floor(double floor_dbm, double bandwidth_hz);

/// Largest distance at which `p_tx_dbm` still arrives at or above
/// `threshold_dbm` over `topo` (its distance field is ignored).
double closing_range_m(double p_tx_dbm, const LinkTopology& topo, double threshold_dbm);

/// Energy-detector channel for power envelopes. Each output sample is the
/// mean of |sqrt(S) + n_k|^2 over M = round(bandwidth / sample_rate)
/// independent CN(0, N) noise draws, N = noise_floor in mW.
template <typename Scalar>
BasicPowerEnvelope<Scalar> propagate(const BasicPowerEnvelope<Scalar>& wave, double loss_db,
                                     const NoiseModel& noise, Rng& rng) {
    BasicPowerEnvelope<Scalar> out;
    out.sample_rate_hz = wave.sample_rate_hz;
    out.power_mw = wave.power_mw * static_cast<Scalar>(std::pow(10.0, -loss_db / 10.0));

    const double n_mw = dbm_to_mw(noise_floor(noise));
    if (n_mw == 0.0 || out.power_mw.size() == 0) return out;
    if (!(wave.sample_rate_hz > 0)) {
        throw ConfigurationError("propagate: sample rate must be positive");
    }

    const long m = std::max(1L, std::lround(noise.bandwidth_hz / double(wave.sample_rate_hz)));
    std::normal_distribution<Scalar> gauss(Scalar(0), static_cast<Scalar>(std::sqrt(n_mw / 2.0)));
    for (Eigen::Index i = 0; i < out.power_mw.size(); ++i) {
        const Scalar amp = std::sqrt(out.power_mw(i));
        Scalar acc = 0;
        for (long k = 0; k < m; ++k) {
            const Scalar re = amp + gauss(rng);
            const Scalar im = gauss(rng);
            acc += re * re + im * im;
        }
        out.power_mw(i) = acc / static_cast<Scalar>(m);
    }
    return out;
}

/// Complex AWGN channel: amplitude scaled by 10^(-loss/20), complex
/// Gaussian noise of per-sample variance noise_floor (mW) added.
template <typename Scalar>
BasicComplexBaseband<Scalar> propagate(const BasicComplexBaseband<Scalar>& wave, double loss_db,
                                       const NoiseModel& noise, Rng& rng) {
    if (wave.size() > 0 && !(wave.sample_rate_hz >= 2 * wave.occupied_bandwidth_hz)) {
        throw ConfigurationError("propagate: waveform undersampled (sample rate below twice "
                                 "the occupied bandwidth)");
    }
    BasicComplexBaseband<Scalar> out = wave;
    out.samples *= static_cast<Scalar>(std::pow(10.0, -loss_db / 20.0));

    const double n_mw = dbm_to_mw(noise_floor(noise));
    if (n_mw == 0.0) return out;

    std::normal_distribution<Scalar> gauss(Scalar(0), static_cast<Scalar>(std::sqrt(n_mw / 2.0)));
    for (Eigen::Index i = 0; i < out.samples.size(); ++i) {
        const Scalar re = gauss(rng);
        const Scalar im = gauss(rng);
        out.samples(i) += std::complex<Scalar>(re, im);
    }
    return out;
}

/// Rescales a unit-amplitude baseband waveform to `p_dbm` per sample.
template <typename Scalar>
BasicComplexBaseband<Scalar> scale_to_power(BasicComplexBaseband<Scalar> wave, double p_dbm) {
    wave.samples *= static_cast<Scalar>(std::sqrt(dbm_to_mw(p_dbm)));
    return wave;
}

}  // namespace tunnelscatter::channel
