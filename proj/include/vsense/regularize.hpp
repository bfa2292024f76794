#pragma once

#include "vsense/identify.hpp"
#include "vsense/numerics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vsense {

// Minimizer of ||rhs - H f||^2 + alpha ||f||^2. H may be rectangular.
Vector tikhonov_solve(const Matrix& h, const Vector& rhs, double alpha);

// The linear map rhs -> f of tikhonov_solve, i.e. (H^T H + alpha I)^{-1} H^T.
// At alpha = 0 a square H is inverted directly through a rank-revealing QR.
// Throws SingularNormalMatrix when the problem has no unique solution.
Matrix tikhonov_gain(const Matrix& h, double alpha);

struct LCurvePoint {
    double alpha = 0.0;
    double residual_norm = 0.0;
    double solution_norm = 0.0;
};

// `count` log-spaced values over [lo, hi] * sigma_max(H)^2, ascending.
std::vector<double> default_alpha_grid(const Matrix& h, Index count = 50, double lo = 1e-12,
                                       double hi = 1e2);

struct CornerSelection {
    Index index = 0;
    bool degenerate = false;
    std::vector<double> curvature;  // per point; zero at both ends
};

// Maximum signed three-point curvature of (log residual, log solution) with
// points ordered by increasing alpha. Falls back to index 0 and sets
// `degenerate` when no point turns the L-corner way.
CornerSelection select_corner(const std::vector<LCurvePoint>& points);

struct LCurveResult {
    double alpha = 0.0;
    Index index = 0;
    bool degenerate = false;
    std::string warning;
    std::vector<LCurvePoint> points;
    std::vector<double> curvature;
};

// Runs the identifier once over the calibration window at the smallest grid
// value, records each step's right-hand side, then evaluates every grid value
// on those recorded right-hand sides. The grid must be positive and strictly
// increasing; a one-point grid returns that point with a warning.
LCurveResult lcurve_select(const PartitionedModel& model, const NewmarkParams& params, InputKind kind,
                           const SignalSeries& calibration, const std::vector<double>& alpha_grid,
                           std::optional<State> initial = std::nullopt);

// Columns alpha,residual_norm,solution_norm,curvature.
void write_lcurve_csv(std::ostream& out, const LCurveResult& result);
void write_lcurve_csv(const std::filesystem::path& path, const LCurveResult& result);

}  // namespace vsense
