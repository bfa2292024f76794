#include "vsense/signals.hpp"

#include "vsense/error.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

namespace vsense {

std::string_view signal_kind_name(SignalKind kind) {
    switch (kind) {
        case SignalKind::Displacement: return "displacement";
        case SignalKind::Velocity: return "velocity";
        case SignalKind::Acceleration: return "acceleration";
        case SignalKind::Force: return "force";
    }
    return "unknown";
}

SignalKind parse_signal_kind(std::string_view name) {
    if (name == "displacement") return SignalKind::Displacement;
    if (name == "velocity") return SignalKind::Velocity;
    if (name == "acceleration") return SignalKind::Acceleration;
    if (name == "force") return SignalKind::Force;
    throw Error(Errc::InvalidArgument, "unknown signal kind '" + std::string(name) + "'");
}

SignalSeries::SignalSeries(double dt_, double t0_, std::vector<std::string> channels_, Matrix samples_,
                           SignalKind kind_)
    : dt(dt_), t0(t0_), channels(std::move(channels_)), samples(std::move(samples_)), kind(kind_) {
    validate();
}

void SignalSeries::validate() const {
    if (!(dt > 0) || !std::isfinite(dt) || !std::isfinite(t0)) {
        throw Error(Errc::InvalidArgument, "series needs a positive finite sample interval");
    }
    if (static_cast<Index>(channels.size()) != samples.cols()) {
        throw Error(Errc::DimensionMismatch, "channel labels do not match sample columns");
    }
    if (!samples.allFinite()) {
        throw Error(Errc::NonFiniteMeasurement, "series contains non-finite samples");
    }
}

Index SignalSeries::channel_index(const std::string& label) const {
    for (std::size_t j = 0; j < channels.size(); ++j)
        if (channels[j] == label) return static_cast<Index>(j);
    throw Error(Errc::UnknownLabel, "channel '" + label + "' not in series");
}

Vector SignalSeries::channel(const std::string& label) const {
    return samples.col(channel_index(label));
}

SignalSeries SignalSeries::select(const std::vector<std::string>& labels) const {
    Matrix out(n_samples(), static_cast<Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) out.col(static_cast<Index>(j)) = channel(labels[j]);
    return SignalSeries(dt, t0, labels, std::move(out), kind);
}

ForceProfile parse_force_profile(std::string_view id) {
    if (id == "f1x") return ForceProfile::F1x;
    if (id == "f1y") return ForceProfile::F1y;
    if (id == "f2x") return ForceProfile::F2x;
    if (id == "f2y") return ForceProfile::F2y;
    throw Error(Errc::UnknownProfile, "unknown force profile '" + std::string(id) + "'");
}

std::string_view force_profile_name(ForceProfile p) {
    switch (p) {
        case ForceProfile::F1x: return "f1x";
        case ForceProfile::F1y: return "f1y";
        case ForceProfile::F2x: return "f2x";
        case ForceProfile::F2y: return "f2y";
    }
    return "unknown";
}

double chirp_tone_value(ForceProfile p, double t) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double envelope = 1.0 - std::exp(-t / kEnvelopeTime);
    const double chirp_phase = two_pi * kChirpRate * t * t;
    const double tone = std::sin(two_pi * kToneFrequency * t);
    switch (p) {
        case ForceProfile::F1x: return envelope * (5500.0 * std::sin(chirp_phase) + 5000.0 * tone);
        case ForceProfile::F1y: return envelope * (5500.0 * std::cos(chirp_phase) + 5000.0 * tone);
        case ForceProfile::F2x:
        case ForceProfile::F2y: return envelope * (10000.0 * std::sin(chirp_phase) + 5400.0 * tone);
    }
    return 0.0;
}

SignalSeries chirp_tone_force(const std::vector<ForceProfile>& profiles,
                              const std::vector<std::string>& labels, double t0, double dt, Index n) {
    if (profiles.size() != labels.size()) {
        throw Error(Errc::DimensionMismatch, "one label per force profile is required");
    }
    if (t0 < 0) throw Error(Errc::InvalidArgument, "profiles are defined for t >= 0");
    Matrix s(n, static_cast<Index>(profiles.size()));
    for (Index i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        for (std::size_t j = 0; j < profiles.size(); ++j) s(i, static_cast<Index>(j)) = chirp_tone_value(profiles[j], t);
    }
    return SignalSeries(dt, t0, labels, std::move(s), SignalKind::Force);
}

namespace {

std::mt19937_64 channel_engine(std::uint64_t seed, std::size_t channel) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(channel), 0x5eedu};
    return std::mt19937_64(seq);
}

double sample_std(const Eigen::Ref<const Vector>& x) {
    if (x.size() < 2) return 0.0;
    const double mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

}  // namespace

SignalSeries add_noise(const SignalSeries& clean, double sigma_fraction, std::uint64_t seed) {
    if (!(sigma_fraction >= 0)) throw Error(Errc::InvalidArgument, "sigma_fraction must be >= 0");
    SignalSeries out = clean;
    if (sigma_fraction == 0.0) return out;
    for (Index j = 0; j < clean.n_channels(); ++j) {
        const double sigma = sigma_fraction * sample_std(clean.samples.col(j));
        auto engine = channel_engine(seed, static_cast<std::size_t>(j));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index i = 0; i < clean.n_samples(); ++i) out.samples(i, j) += sigma * normal(engine);
    }
    return out;
}

std::vector<double> snr_db(const SignalSeries& noisy, const SignalSeries& clean) {
    if (noisy.n_samples() != clean.n_samples() || noisy.n_channels() != clean.n_channels() ||
        std::abs(noisy.dt - clean.dt) > 1e-12 * clean.dt) {
        throw Error(Errc::GridMismatch, "noisy and clean series differ in shape or dt");
    }
    std::vector<double> out;
    for (Index j = 0; j < clean.n_channels(); ++j) {
        const double signal = noisy.samples.col(j).norm();
        const double noise = (noisy.samples.col(j) - clean.samples.col(j)).norm();
        out.push_back(noise == 0.0 ? std::numeric_limits<double>::infinity()
                                   : 20.0 * std::log10(signal / noise));
    }
    return out;
}

SignalSeries bandlimited_random_force(double f_lo, double f_hi, double amplitude, double duration,
                                      double dt, std::uint64_t seed, const std::string& label) {
    if (!(dt > 0) || !(duration > 0)) throw Error(Errc::InvalidArgument, "duration and dt must be positive");
    if (!(f_lo >= 0) || !(f_hi > f_lo) || !(f_hi < 0.5 / dt)) {
        throw Error(Errc::InvalidBand, "band must satisfy 0 <= f_lo < f_hi < Nyquist");
    }
    if (!(amplitude >= 0)) throw Error(Errc::InvalidArgument, "amplitude must be >= 0");
    const auto n = static_cast<std::size_t>(std::llround(duration / dt));
    if (n < 4) throw Error(Errc::InvalidArgument, "record too short");

    auto engine = channel_engine(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> white(n);
    for (auto& w : white) w = normal(engine);

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, white);
    const double df = 1.0 / (static_cast<double>(n) * dt);
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kk = std::min(k, n - k);
        const double f = static_cast<double>(kk) * df;
        const bool keep = kk != 0 && f >= f_lo && f <= f_hi;
        if (!keep) spec[k] = 0.0;
        any = any || keep;
    }
    if (!any) throw Error(Errc::InvalidBand, "band contains no frequency bins for this record length");
    std::vector<double> shaped;
    fft.inv(shaped, spec);

    Vector x = Eigen::Map<Vector>(shaped.data(), static_cast<Index>(n));
    x.array() -= x.mean();
    const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(n));
    if (rms > 0.0) x *= amplitude / rms;
    return SignalSeries(dt, 0.0, {label}, Matrix(x), SignalKind::Force);
}

}  // namespace vsense
