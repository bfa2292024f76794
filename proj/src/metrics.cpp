#include "vsense/metrics.hpp"

#include "vsense/csv.hpp"
#include "vsense/error.hpp"
#include "vsense/format.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>

namespace vsense {

FdeReport fde(std::span<const double> reference, std::span<const double> candidate, double dt,
              double f0, double fmax) {
    if (reference.size() != candidate.size()) {
        throw Error(Errc::GridMismatch, "reference and candidate lengths differ");
    }
    if (!(dt > 0)) throw Error(Errc::InvalidArgument, "dt must be positive");
    const std::size_t n = reference.size();
    const double nyquist = 0.5 / dt;
    if (!(f0 >= 0) || !(f0 < fmax) || fmax > nyquist * (1.0 + 1e-12)) {
        throw Error(Errc::EmptyBand, "band must satisfy 0 <= f0 < fmax <= Nyquist");
    }
    if (n == 0) throw Error(Errc::EmptyBand, "empty record");

    Eigen::FFT<double> fft;
    std::vector<double> a(reference.begin(), reference.end());
    std::vector<double> b(candidate.begin(), candidate.end());
    std::vector<std::complex<double>> za, zb;
    fft.fwd(za, a);
    fft.fwd(zb, b);

    const double df = 1.0 / (static_cast<double>(n) * dt);
    double num = 0.0, den = 0.0;
    Index bins = 0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * df;
        if (f < f0 - 1e-9 * df || f > fmax + 1e-9 * df) continue;
        num += std::abs(za[k] - zb[k]);
        den += std::abs(za[k]) + std::abs(zb[k]);
        ++bins;
    }
    if (bins == 0) throw Error(Errc::EmptyBand, "no DFT bins inside the band");
    FdeReport r;
    r.value = den > 0.0 ? num / den : 0.0;
    r.f0 = f0;
    r.fmax = fmax;
    r.n_bins = bins;
    return r;
}

FdeReport fde(std::span<const double> reference, std::span<const double> candidate, double dt) {
    return fde(reference, candidate, dt, 0.0, 0.5 / dt);
}

TimingStats timing_stats(std::span<const double> t) {
    TimingStats s;
    s.count = t.size();
    if (t.empty()) return s;
    std::vector<double> sorted(t.begin(), t.end());
    std::sort(sorted.begin(), sorted.end());
    for (double x : sorted) s.total += x;
    s.mean = s.total / static_cast<double>(sorted.size());
    s.max = sorted.back();
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));
    s.p99 = sorted[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "case_id,channel,metric,value\n";
    for (const auto& r : rows) {
        out << csv::quote_field(r.case_id) << ',' << csv::quote_field(r.channel) << ','
            << csv::quote_field(r.metric) << ',' << format_double(r.value) << '\n';
    }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write_metrics_csv(out, rows);
}

}  // namespace vsense
