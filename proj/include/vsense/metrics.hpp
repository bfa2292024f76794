#pragma once

#include "vsense/numerics.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vsense {

struct FdeReport {
    double value = 0.0;
    double f0 = 0.0;
    double fmax = 0.0;
    Index n_bins = 0;
};

// Frequency-domain error between a reference and a candidate record:
//   sum_k |Z_ref(k) - Z_cand(k)| / sum_k (|Z_ref(k)| + |Z_cand(k)|)
// over the one-sided DFT bins with f0 <= f_k <= fmax. No windowing.
// Zero when both spectra vanish in the band.
FdeReport fde(std::span<const double> reference, std::span<const double> candidate, double dt,
              double f0, double fmax);
// Full band [0, Nyquist].
FdeReport fde(std::span<const double> reference, std::span<const double> candidate, double dt);

inline std::span<const double> as_span(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

struct TimingStats {
    std::size_t count = 0;
    double total = 0.0;
    double mean = 0.0;
    double max = 0.0;
    double p99 = 0.0;  // nearest-rank
};

TimingStats timing_stats(std::span<const double> per_step_seconds);

struct MetricRow {
    std::string case_id;
    std::string channel;
    std::string metric;
    double value = 0.0;
};

// Flat CSV: case_id,channel,metric,value
void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

}  // namespace vsense
