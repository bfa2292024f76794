#pragma once

#include "vsense/numerics.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vsense {

enum class SignalKind { Displacement, Velocity, Acceleration, Force };

std::string_view signal_kind_name(SignalKind kind);
SignalKind parse_signal_kind(std::string_view name);

// Uniformly sampled multichannel series; row i is sampled at t0 + i*dt.
struct SignalSeries {
    double dt = 1.0;
    double t0 = 0.0;
    std::vector<std::string> channels;
    Matrix samples;  // n_samples x n_channels
    SignalKind kind = SignalKind::Displacement;

    SignalSeries() = default;
    SignalSeries(double dt, double t0, std::vector<std::string> channels, Matrix samples, SignalKind kind);

    Index n_samples() const { return samples.rows(); }
    Index n_channels() const { return samples.cols(); }
    double time(Index i) const { return t0 + static_cast<double>(i) * dt; }
    Index channel_index(const std::string& label) const;  // throws UnknownLabel
    Vector channel(const std::string& label) const;
    SignalSeries select(const std::vector<std::string>& labels) const;
    void validate() const;
};

enum class ForceProfile { F1x, F1y, F2x, F2y };

ForceProfile parse_force_profile(std::string_view id);  // "f1x", ... ; throws UnknownProfile
std::string_view force_profile_name(ForceProfile p);

inline constexpr double kChirpRate = 1000.0;  // omega_1
inline constexpr double kToneFrequency = 200.0;  // omega_2, Hz
inline constexpr double kEnvelopeTime = 0.05;  // s

// Ramped chirp-plus-tone load, e.g. f1x(t) = (1 - exp(-t/0.05)) *
// (5500 sin(2 pi w1 t^2) + 5000 sin(2 pi w2 t)).
double chirp_tone_value(ForceProfile p, double t);

// One channel per profile on the grid t0 + i*dt, i < n.
SignalSeries chirp_tone_force(const std::vector<ForceProfile>& profiles,
                              const std::vector<std::string>& labels,
                              double t0, double dt, Index n);

// Per-channel sigma = sigma_fraction * std(channel); channel j draws from an
// engine seeded with (seed, j).
SignalSeries add_noise(const SignalSeries& clean, double sigma_fraction, std::uint64_t seed);

// 20 log10(rms(noisy) / rms(noisy - clean)) per channel; +inf when identical.
std::vector<double> snr_db(const SignalSeries& noisy, const SignalSeries& clean);

// Zero-mean Gaussian noise shaped to [f_lo, f_hi] in the frequency domain and
// scaled to the requested RMS amplitude. Samples at i*dt, i < round(duration/dt).
SignalSeries bandlimited_random_force(double f_lo, double f_hi, double amplitude, double duration,
                                      double dt, std::uint64_t seed, const std::string& label = "f:1");

}  // namespace vsense
