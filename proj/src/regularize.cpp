#include "vsense/regularize.hpp"

#include "vsense/error.hpp"
#include "vsense/format.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <limits>

namespace vsense {

namespace {

void check_alpha(double alpha) {
    if (!(alpha >= 0) || !std::isfinite(alpha)) throw Error(Errc::InvalidArgument, "alpha must be >= 0");
}

}  // namespace

Matrix tikhonov_gain(const Matrix& h, double alpha) {
    check_alpha(alpha);
    const Index n = h.cols();
    if (alpha == 0.0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(h);
        if (qr.rank() < n) {
            throw Error(Errc::SingularNormalMatrix, "H is rank deficient and alpha is zero");
        }
        if (h.rows() == n) return qr.inverse();
        return qr.solve(Matrix(Matrix::Identity(h.rows(), h.rows())));
    }
    Matrix normal = h.transpose() * h;
    normal.diagonal().array() += alpha;
    Eigen::LLT<Matrix> llt(normal);
    if (llt.info() != Eigen::Success) {
        throw Error(Errc::SingularNormalMatrix, "normal matrix is not positive definite");
    }
    return llt.solve(Matrix(h.transpose()));
}

Vector tikhonov_solve(const Matrix& h, const Vector& rhs, double alpha) {
    if (rhs.size() != h.rows()) throw Error(Errc::DimensionMismatch, "rhs length does not match H rows");
    return tikhonov_gain(h, alpha) * rhs;
}

std::vector<double> default_alpha_grid(const Matrix& h, Index count, double lo, double hi) {
    if (count < 1) throw Error(Errc::InvalidArgument, "grid needs at least one point");
    if (!(lo > 0) || !(hi >= lo)) throw Error(Errc::InvalidArgument, "grid bounds must satisfy 0 < lo <= hi");
    const double smax = h.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(h).singularValues()(0);
    if (!(smax > 0)) throw Error(Errc::InvalidArgument, "H has no nonzero singular value");
    const double scale = smax * smax;
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (Index i = 0; i < count; ++i) {
        const double w = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        grid[static_cast<std::size_t>(i)] = scale * std::pow(10.0, llo + w * (lhi - llo));
    }
    return grid;
}

CornerSelection select_corner(const std::vector<LCurvePoint>& points) {
    CornerSelection sel;
    const std::size_t n = points.size();
    sel.curvature.assign(n, 0.0);
    if (n < 3) {
        sel.degenerate = n > 1;
        return sel;
    }
    constexpr double tiny = std::numeric_limits<double>::min();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log10(std::max(points[i].residual_norm, tiny));
        y[i] = std::log10(std::max(points[i].solution_norm, tiny));
    }
    double best = 0.0;
    bool found = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double ax = x[i] - x[i - 1], ay = y[i] - y[i - 1];
        const double bx = x[i + 1] - x[i], by = y[i + 1] - y[i];
        const double cx = x[i + 1] - x[i - 1], cy = y[i + 1] - y[i - 1];
        const double la = std::hypot(ax, ay), lb = std::hypot(bx, by), lc = std::hypot(cx, cy);
        if (la == 0.0 || lb == 0.0 || lc == 0.0) continue;
        const double k = 2.0 * (ax * by - ay * bx) / (la * lb * lc);
        sel.curvature[i] = k;
        if (k > best * (1.0 + 1e-12) && k > 1e-9) {
            best = k;
            sel.index = static_cast<Index>(i);
            found = true;
        }
    }
    if (!found) {
        sel.index = 0;
        sel.degenerate = true;
    }
    return sel;
}

LCurveResult lcurve_select(const PartitionedModel& model, const NewmarkParams& params, InputKind kind,
                           const SignalSeries& calibration, const std::vector<double>& alpha_grid,
                           std::optional<State> initial) {
    if (alpha_grid.empty()) throw Error(Errc::InvalidArgument, "alpha grid is empty");
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        if (!(alpha_grid[i] > 0) || !std::isfinite(alpha_grid[i])) {
            throw Error(Errc::InvalidArgument, "alpha grid values must be positive");
        }
        if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
            throw Error(Errc::InvalidArgument, "alpha grid must be strictly increasing");
        }
    }

    LCurveResult result;
    if (alpha_grid.size() == 1) {
        result.alpha = alpha_grid.front();
        result.warning = "single-point grid; curvature rule not applied";
        result.points.push_back({result.alpha, 0.0, 0.0});
        result.curvature.push_back(0.0);
        return result;
    }
    if (calibration.n_samples() < 10) {
        throw Error(Errc::InvalidArgument, "calibration window needs at least 10 samples");
    }

    IdentifySession pilot = session_setup(model, params, alpha_grid.front(), kind, std::move(initial));
    const auto labels = model.measured_labels();
    check_sample_rate(calibration.dt, params.dt);
    const SignalSeries meas = calibration.select(labels);
    const Index n = meas.n_samples();
    const Index nm = model.n_measured();
    Matrix rhs(nm, n);
    for (Index i = 0; i < n; ++i) rhs.col(i) = pilot.step(meas.samples.row(i).transpose()).rhs;

    // In the singular basis S = U diag(s) V^T each component of the residual
    // and of the solution is a monotone function of alpha, so the summed
    // norms are monotone even in floating point.
    const Matrix& s_map = pilot.setup().measured_map;
    Eigen::JacobiSVD<Matrix> svd(s_map, Eigen::ComputeFullU);
    const Vector sv = svd.singularValues();
    const Matrix coeffs = svd.matrixU().transpose() * rhs;

    for (double alpha : alpha_grid) {
        double res2 = 0.0, sol2 = 0.0;
        for (Index k = 0; k < n; ++k) {
            for (Index i = 0; i < coeffs.rows(); ++i) {
                const double c = coeffs(i, k);
                const double s = i < sv.size() ? sv(i) : 0.0;
                const double d = s * s + alpha;
                const double r = c / (s * s / alpha + 1.0);
                const double f = s * c / d;
                res2 += r * r;
                sol2 += f * f;
            }
        }
        result.points.push_back({alpha, std::sqrt(res2), std::sqrt(sol2)});
    }

    const CornerSelection corner = select_corner(result.points);
    result.index = corner.index;
    result.alpha = alpha_grid[static_cast<std::size_t>(corner.index)];
    result.degenerate = corner.degenerate;
    result.curvature = corner.curvature;
    if (corner.degenerate) result.warning = "no L-curve corner found; using the smallest alpha";
    return result;
}

void write_lcurve_csv(std::ostream& out, const LCurveResult& result) {
    out << "alpha,residual_norm,solution_norm,curvature\n";
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& p = result.points[i];
        const double k = i < result.curvature.size() ? result.curvature[i] : 0.0;
        out << format_double(p.alpha) << ',' << format_double(p.residual_norm) << ','
            << format_double(p.solution_norm) << ',' << format_double(k) << '\n';
    }
}

void write_lcurve_csv(const std::filesystem::path& path, const LCurveResult& result) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write_lcurve_csv(out, result);
}

}  // namespace vsense
