#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace tunnelscatter {

/// Random source used throughout. Every stochastic operation takes one by
/// reference; nothing draws from global state.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; mixes a base seed with a stream index so that
/// sweep points and ensemble members get independent, order-free streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

using Bits = std::vector<std::uint8_t>;

/// First sample of symbol `k` at `rate` symbols/s: round(k * fs / rate).
inline Eigen::Index symbol_start(Eigen::Index k, double sample_rate_hz, double rate) {
    return static_cast<Eigen::Index>(std::llround(double(k) * sample_rate_hz / rate));
}

/// Real power versus time, in milliwatts per sample (ACLT / ASK signals).
template <typename Scalar>
struct BasicPowerEnvelope {
    using Samples = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    Samples power_mw;
    Scalar sample_rate_hz{};

    Eigen::Index size() const noexcept { return power_mw.size(); }
};

/// Complex envelope relative to `center_freq_hz`, in sqrt(mW) so that
/// |x|^2 is instantaneous power in mW (ABT / FSK signals).
template <typename Scalar>
struct BasicComplexBaseband {
    using Samples = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

    Samples samples;
    Scalar sample_rate_hz{};
    Scalar center_freq_hz{};
    /// One-sided extent of the occupied spectrum around the center.
    Scalar occupied_bandwidth_hz{};

    Eigen::Index size() const noexcept { return samples.size(); }
};

using PowerEnvelope = BasicPowerEnvelope<double>;
using ComplexBaseband = BasicComplexBaseband<double>;

}  // namespace tunnelscatter
