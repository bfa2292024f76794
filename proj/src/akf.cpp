#include "vsense/akf.hpp"

#include "vsense/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>

namespace vsense {

void AkfConfig::validate() const {
    auto positive = [](double x) { return x > 0 && std::isfinite(x); };
    if (!positive(dt)) throw Error(Errc::InvalidArgument, "AKF dt must be positive");
    if (!positive(process_noise_state) || !positive(process_noise_force) || !positive(measurement_noise)) {
        throw Error(Errc::InvalidArgument, "AKF noise variances must be positive");
    }
    if (!positive(initial_covariance) || !positive(initial_state_covariance)) {
        throw Error(Errc::InvalidArgument, "AKF initial covariances must be positive");
    }
}

AugmentedKalmanFilter::AugmentedKalmanFilter(const PartitionedModel& model, const AkfConfig& cfg)
    : model_(model), cfg_(cfg) {
    cfg.validate();
    const Index n = model.size();
    const Index nf = model.n_measured();
    if (nf < 1) throw Error(Errc::InvalidPartition, "no measured DOFs");
    const Index ns = 2 * n + nf;

    const Factorization mf(model.m());
    const Matrix minv_k = mf.solve(model.k().dense());
    const Matrix minv_c = mf.solve(model.c().dense());
    Matrix sp = Matrix::Zero(n, nf);
    sp.topRows(nf).setIdentity();
    const Matrix minv_s = mf.solve(sp);

    Matrix a = Matrix::Zero(ns, ns);
    a.block(0, n, n, n).setIdentity();
    a.block(n, 0, n, n) = -minv_k;
    a.block(n, n, n, n) = -minv_c;
    a.block(n, 2 * n, n, nf) = minv_s;
    phi_ = (a * cfg.dt).exp();

    accel_.resize(n, ns);
    accel_.leftCols(n) = -minv_k;
    accel_.middleCols(n, n) = -minv_c;
    accel_.rightCols(nf) = minv_s;
    obs_ = accel_.topRows(nf);

    q_ = Matrix::Zero(ns, ns);
    q_.diagonal().head(2 * n).setConstant(cfg.process_noise_state * cfg.dt);
    q_.diagonal().tail(nf).setConstant(cfg.process_noise_force * cfg.dt);
    r_ = Matrix::Identity(nf, nf) * cfg.measurement_noise;
    reset();
}

void AugmentedKalmanFilter::reset() {
    const Index ns = phi_.rows();
    state_.mean = Vector::Zero(ns);
    const Index nf = model_.n_measured();
    state_.covariance = Matrix::Zero(ns, ns);
    state_.covariance.diagonal().head(ns - nf).setConstant(cfg_.initial_state_covariance);
    state_.covariance.diagonal().tail(nf).setConstant(cfg_.initial_covariance);
}

StepResult AugmentedKalmanFilter::step(const Vector& y) {
    const auto start = std::chrono::steady_clock::now();
    const Index n = model_.size();
    const Index nf = model_.n_measured();
    if (y.size() != nf) throw Error(Errc::DimensionMismatch, "measurement length does not match measured DOFs");
    if (!y.allFinite()) throw Error(Errc::NonFiniteMeasurement, "measurement contains NaN or Inf");

    Vector z = phi_ * state_.mean;
    Matrix p = phi_ * state_.covariance * phi_.transpose() + q_;

    const Matrix pg = p * obs_.transpose();
    Matrix s = obs_ * pg + r_;
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) throw Error(Errc::DivergedFilter, "innovation covariance lost definiteness");
    const Matrix gain = llt.solve(Matrix(pg.transpose())).transpose();
    const Vector innovation = y - obs_ * z;
    z.noalias() += gain * innovation;

    Matrix ikg = -gain * obs_;
    ikg.diagonal().array() += 1.0;
    p = ikg * p * ikg.transpose() + gain * r_ * gain.transpose();
    p = 0.5 * (p + p.transpose()).eval();

    const double tr = p.trace();
    if (!z.allFinite() || !std::isfinite(tr) || tr > 1e100) {
        throw Error(Errc::DivergedFilter, "covariance trace exceeded the overflow guard");
    }
    state_.mean = std::move(z);
    state_.covariance = std::move(p);

    StepResult out;
    out.displacement = state_.mean.head(n);
    out.velocity = state_.mean.segment(n, n);
    out.force = state_.mean.tail(nf);
    out.acceleration = accel_ * state_.mean;
    out.rhs = innovation;
    out.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

AugmentedKalmanFilter akf_setup(const PartitionedModel& model, const AkfConfig& cfg) {
    return AugmentedKalmanFilter(model, cfg);
}

RunOutput akf_run(AugmentedKalmanFilter& filter, const SignalSeries& measurements) {
    const PartitionedModel& model = filter.model();
    const auto labels = model.measured_labels();
    const Index n = measurements.n_samples();
    RunOutput out;
    if (n > 0) {
        check_sample_rate(measurements.dt, filter.config().dt);
        if (measurements.kind != SignalKind::Acceleration) {
            throw Error(Errc::InvalidArgument, "AKF expects acceleration measurements");
        }
    }
    const SignalSeries selected = n > 0 ? measurements.select(labels) : measurements;
    Matrix forces(n, model.n_measured());
    Matrix disp(n, model.size());
    out.step_seconds.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const StepResult r = filter.step(selected.samples.row(i).transpose());
        forces.row(i) = r.force.transpose();
        disp.row(i) = r.displacement.transpose();
        out.step_seconds.push_back(r.elapsed);
    }
    out.forces = SignalSeries(filter.config().dt, measurements.t0, labels, std::move(forces), SignalKind::Force);
    out.displacements =
        SignalSeries(filter.config().dt, measurements.t0, model.labels(), std::move(disp), SignalKind::Displacement);
    out.timing = timing_stats(out.step_seconds);
    return out;
}

}  // namespace vsense
