#include "support.hpp"

#include "vsense/identify.hpp"
#include "vsense/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <thread>

using namespace vsense;
using vsense::testing::code_of;
using vsense::testing::measured_series;
using vsense::testing::random_spd;
using vsense::testing::simulate_measured_forces;

namespace {

PartitionedModel single_dof(double m, double c, double k) {
    return partition_matrices(SymMatrix(Matrix::Constant(1, 1, m)), SymMatrix(Matrix::Constant(1, 1, c)),
                              SymMatrix(Matrix::Constant(1, 1, k)), {"0:x"}, {"0:x"});
}

std::vector<std::string> labels_for(Index n) {
    std::vector<std::string> l;
    for (Index i = 0; i < n; ++i) l.push_back(std::to_string(i) + ":x");
    return l;
}

PartitionedModel random_model(Index n, Index nm, std::uint64_t seed) {
    const SymMatrix m = random_spd(n, seed);
    const SymMatrix k = 1e3 * random_spd(n, seed + 1);
    const SymMatrix c = 0.01 * m + 1e-4 * k;
    const auto labels = labels_for(n);
    return partition_matrices(m, c, k, labels, std::vector<std::string>(labels.begin(), labels.begin() + nm));
}

Matrix chirp_forces(Index steps, double dt, Index channels) {
    const std::vector<ForceProfile> all = {ForceProfile::F1x, ForceProfile::F2x, ForceProfile::F1y, ForceProfile::F2y};
    Matrix f(steps, channels);
    for (Index i = 0; i < steps; ++i)
        for (Index j = 0; j < channels; ++j) f(i, j) = chirp_tone_value(all[j % 4], (i + 1) * dt);
    return f;
}

}  // namespace

TEST(EffectiveStiffness, ScalarFormula) {
    NewmarkParams p;
    p.dt = 1.0;
    const SymMatrix k_eff = effective_stiffness(SymMatrix::identity(1), SymMatrix::zero(1), SymMatrix::identity(1), p);
    EXPECT_EQ(k_eff(0, 0), 5.0);
}

TEST(Setup, DecoupledTransferMatrix) {
    const auto labels = labels_for(3);
    const SymMatrix m = SymMatrix::diagonal((Vector(3) << 1, 2, 3).finished());
    const SymMatrix k = SymMatrix::diagonal((Vector(3) << 10, 20, 30).finished());
    const auto pm = partition_matrices(m, SymMatrix::zero(3), k, labels, {"1:x"});
    NewmarkParams p;
    p.dt = 0.01;
    const auto setup = make_identify_setup(pm, p, 0.0, InputKind::Displacement);
    const double kmm = 2.0 / (0.25 * 1e-4) + 20.0;
    EXPECT_NEAR(setup->h(0, 0), 1.0 / kmm, 1e-15 / kmm);
}

TEST(Setup, TransferMatrixIsMeasuredBlockOfInverse) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const PartitionedModel pm = random_model(8, 3, seed);
        NewmarkParams p;
        p.dt = 1e-3;
        const auto setup = make_identify_setup(pm, p, 0.0, InputKind::Displacement);
        const Matrix k_eff = effective_stiffness(pm.m(), pm.c(), pm.k(), p).dense();
        const Matrix oracle = k_eff.inverse().topLeftCorner(3, 3);
        EXPECT_LE((setup->h.dense() - oracle).norm() / oracle.norm(), 1e-9);
        EXPECT_LE((setup->response.topRows(3) - oracle).norm() / oracle.norm(), 1e-9);
    }
}

TEST(Setup, Errors) {
    NewmarkParams p;
    const auto pm = single_dof(1, 0, 1);
    EXPECT_EQ(code_of([&] { make_identify_setup(pm, p, -1.0, InputKind::Displacement); }), Errc::InvalidArgument);
    NewmarkParams bad = p;
    bad.dt = 0.0;
    EXPECT_EQ(code_of([&] { make_identify_setup(pm, bad, 0.0, InputKind::Displacement); }), Errc::InvalidArgument);
    const auto singular = partition_matrices(SymMatrix::zero(1), SymMatrix::zero(1), SymMatrix::zero(1), {"0:x"}, {"0:x"});
    EXPECT_EQ(code_of([&] { make_identify_setup(singular, p, 0.0, InputKind::Displacement); }),
              Errc::SingularEffectiveStiffness);
}

TEST(Step, ZeroInZeroOut) {
    const PartitionedModel pm = random_model(6, 2, 4);
    IdentifySession s = session_setup(pm, NewmarkParams{}, 0.0, InputKind::Displacement);
    const StepResult r = s.step(Vector::Zero(2));
    EXPECT_EQ(r.force, Vector::Zero(2));
    EXPECT_EQ(r.displacement, Vector::Zero(6));
    EXPECT_EQ(r.velocity, Vector::Zero(6));
    EXPECT_EQ(r.acceleration, Vector::Zero(6));
    EXPECT_GE(r.elapsed, 0.0);
}

TEST(Step, RejectsBadMeasurements) {
    IdentifySession s = session_setup(single_dof(1, 0, 1), NewmarkParams{}, 0.0, InputKind::Displacement);
    EXPECT_EQ(code_of([&] { s.step(Vector::Zero(2)); }), Errc::DimensionMismatch);
    EXPECT_EQ(code_of([&] { s.step(Vector::Constant(1, std::nan(""))); }), Errc::NonFiniteMeasurement);
    EXPECT_EQ(code_of([&] { s.step(Vector::Constant(1, INFINITY)); }), Errc::NonFiniteMeasurement);
}

TEST(Step, SingleDofSineRoundTrip) {
    const auto pm = single_dof(1, 0, 1);
    NewmarkParams p;
    p.dt = 1e-3;
    const Index steps = 2000;
    Matrix f(steps, 1);
    for (Index i = 0; i < steps; ++i) f(i, 0) = std::sin(2.0 * std::numbers::pi * (i + 1) * p.dt);
    const auto tr = simulate_measured_forces(pm, p, f);
    IdentifySession s = session_setup(pm, p, 0.0, InputKind::Displacement);
    for (Index i = 0; i < steps; ++i) {
        const StepResult r = s.step(tr.u.row(i).transpose());
        ASSERT_NEAR(r.force(0), f(i, 0), 1e-8) << "step " << i;
    }
}

TEST(Step, ChainChirpRoundTripFde) {
    const PartitionedModel pm = vsense::testing::chain_model(3, {"2:x"});
    NewmarkParams p;
    p.dt = 1e-4;
    const Matrix f = chirp_forces(1000, p.dt, 1);
    const auto tr = simulate_measured_forces(pm, p, f);
    IdentifySession s = session_setup(pm, p, 0.0, InputKind::Displacement);
    const RunOutput out = run_session(s, measured_series(pm, tr.u, p.dt, SignalKind::Displacement));
    ASSERT_EQ(out.forces.n_samples(), 1000);
    EXPECT_LT(fde(as_span(Vector(f.col(0))), as_span(Vector(out.forces.samples.col(0))), p.dt).value, 1e-6);
}

TEST(Step, RoundTripOnRandomModels) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const Index n = 4 + static_cast<Index>(seed);
        const Index nm = 1 + static_cast<Index>(seed % 3);
        const PartitionedModel pm = random_model(n, nm, seed * 11);
        NewmarkParams p;
        p.dt = 1e-3;
        const Matrix f = chirp_forces(300, p.dt, nm);
        const auto tr = simulate_measured_forces(pm, p, f);
        for (InputKind kind : {InputKind::Displacement, InputKind::Acceleration}) {
            IdentifySession s = session_setup(pm, p, 0.0, kind);
            const Matrix& meas = kind == InputKind::Displacement ? tr.u : tr.a;
            double worst_force = 0.0, worst_u = 0.0;
            for (Index i = 0; i < f.rows(); ++i) {
                const StepResult r = s.step(meas.row(i).head(nm).transpose());
                const double fs = std::max(f.row(i).norm(), 1e-3 * f.cwiseAbs().maxCoeff());
                worst_force = std::max(worst_force, (r.force - f.row(i).transpose()).norm() / fs);
                const Vector u_true = tr.u.row(i).tail(n - nm).transpose();
                const double us = std::max(u_true.norm(), 1e-3 * tr.u.cwiseAbs().maxCoeff());
                worst_u = std::max(worst_u, (r.displacement.tail(n - nm) - u_true).norm() / us);
            }
            EXPECT_LE(worst_force, 1e-8) << "seed " << seed << " kind " << input_kind_name(kind);
            EXPECT_LE(worst_u, 1e-8) << "seed " << seed << " kind " << input_kind_name(kind);
        }
    }
}

TEST(Step, ShrinkageInAlpha) {
    const PartitionedModel pm = random_model(7, 3, 5);
    NewmarkParams p;
    p.dt = 1e-3;
    const Matrix f = chirp_forces(50, p.dt, 3);
    ForwardIntegrator fwd(pm, p);
    const auto tr = simulate_measured_forces(pm, p, f);
    std::vector<std::shared_ptr<const IdentifySetup>> setups;
    const double scale = make_identify_setup(pm, p, 0.0, InputKind::Displacement)->h.dense().squaredNorm();
    for (double a : {0.0, 1e-6, 1e-3, 1e-1, 1.0, 10.0, 1e3}) {
        setups.push_back(make_identify_setup(pm, p, a * scale, InputKind::Displacement));
    }
    State ref = State::zero(7);
    Vector load = Vector::Zero(7);
    for (Index i = 0; i < f.rows(); ++i) {
        double prev = INFINITY;
        for (const auto& setup : setups) {
            IdentifySession s(setup, ref);
            const double norm = s.step(tr.u.row(i).head(3).transpose()).force.norm();
            EXPECT_LE(norm, prev) << "step " << i;
            prev = norm;
        }
        load.head(3) = f.row(i).transpose();
        ref = fwd.step(ref, load);
    }
}

TEST(Step, FreeDecayProducesNoForce) {
    const PartitionedModel pm = random_model(6, 2, 21);
    NewmarkParams p;
    p.dt = 1e-3;
    ForwardIntegrator fwd(pm, p);
    const Vector u0 = vsense::testing::random_vector(6, 1) * 1e-3;
    State s0 = fwd.initial_state(u0, Vector::Zero(6), Vector::Zero(6));
    IdentifySession session = session_setup(pm, p, 0.0, InputKind::Displacement, s0);
    State truth = s0;
    const double force_scale = (pm.k().dense() * u0).norm();
    for (int i = 0; i < 200; ++i) {
        truth = fwd.step(truth, Vector::Zero(6));
        const StepResult r = session.step(truth.u.head(2));
        EXPECT_LE(r.force.norm(), 1e-8 * force_scale);
    }
}

TEST(Step, DeterministicAndShareableAcrossThreads) {
    const PartitionedModel pm = random_model(10, 2, 8);
    NewmarkParams p;
    p.dt = 1e-3;
    const auto tr = simulate_measured_forces(pm, p, chirp_forces(200, p.dt, 2));
    const SignalSeries meas = measured_series(pm, tr.u, p.dt, SignalKind::Displacement);
    const auto setup = make_identify_setup(pm, p, 1e-9, InputKind::Displacement);
    RunOutput a, b;
    std::thread ta([&] {
        IdentifySession s(setup);
        a = run_session(s, meas);
    });
    std::thread tb([&] {
        IdentifySession s(setup);
        b = run_session(s, meas);
    });
    ta.join();
    tb.join();
    EXPECT_EQ(a.forces.samples, b.forces.samples);
    EXPECT_EQ(a.displacements.samples, b.displacements.samples);
}

TEST(Forward, FreeVibrationMatchesCosine) {
    const auto pm = single_dof(1, 0, 1);
    NewmarkParams p;
    p.dt = 1e-3;
    ForwardIntegrator fwd(pm, p);
    State s = fwd.initial_state(Vector::Ones(1), Vector::Zero(1), Vector::Zero(1));
    for (int i = 0; i < 1000; ++i) s = fwd.step(s, Vector::Zero(1));
    EXPECT_NEAR(s.t, 1.0, 1e-12);
    EXPECT_NEAR(s.u(0), std::cos(1.0), 1e-4);
}

TEST(Forward, EnergyConservedWithoutDamping) {
    const auto labels = labels_for(5);
    const SymMatrix m = random_spd(5, 2);
    const SymMatrix k = random_spd(5, 3);
    NewmarkParams p;
    p.dt = 1e-2;
    ForwardIntegrator fwd(m, SymMatrix::zero(5), k, p);
    State s = fwd.initial_state(vsense::testing::random_vector(5, 4), vsense::testing::random_vector(5, 5),
                                Vector::Zero(5));
    auto energy = [&](const State& x) {
        return 0.5 * x.v.dot(m.dense() * x.v) + 0.5 * x.u.dot(k.dense() * x.u);
    };
    const double e0 = energy(s);
    for (int i = 0; i < 10000; ++i) s = fwd.step(s, Vector::Zero(5));
    EXPECT_LE(std::abs(energy(s) - e0) / e0, 1e-6);
}

TEST(Forward, DampedStaticLimit) {
    const PartitionedModel pm = vsense::testing::chain_model(4, {"0:x"}, 0.5, 0.05);
    NewmarkParams p;
    p.dt = 0.05;
    ForwardIntegrator fwd(pm, p);
    const Vector f = (Vector(4) << 1.0, -0.5, 0.25, 2.0).finished();
    State s = State::zero(4);
    for (int i = 0; i < 20000; ++i) s = fwd.step(s, f);
    const Vector oracle = pm.k().dense().ldlt().solve(f);
    EXPECT_LE((s.u - oracle).norm(), 1e-6 * oracle.norm());
}

TEST(Forward, ZeroStaysZero) {
    const PartitionedModel pm = random_model(5, 1, 3);
    State s = State::zero(5);
    for (int i = 0; i < 100; ++i) s = forward_step(pm, NewmarkParams{}, s, Vector::Zero(5));
    EXPECT_EQ(s.u, Vector::Zero(5));
    EXPECT_EQ(s.v, Vector::Zero(5));
}

TEST(Forward, SatisfiesEquilibriumAtNextStep) {
    const PartitionedModel pm = random_model(6, 2, 13);
    NewmarkParams p;
    p.dt = 1e-3;
    ForwardIntegrator fwd(pm, p);
    State s = State::zero(6);
    const Vector f = vsense::testing::random_vector(6, 99);
    for (int i = 0; i < 10; ++i) {
        s = fwd.step(s, f);
        const Vector res = pm.m().dense() * s.a + pm.c().dense() * s.v + pm.k().dense() * s.u - f;
        EXPECT_LE(res.norm(), 1e-9 * f.norm());
    }
}

TEST(Run, EmptySeries) {
    IdentifySession s = session_setup(single_dof(1, 0, 1), NewmarkParams{}, 0.0, InputKind::Displacement);
    const SignalSeries empty(1e-4, 0.0, {"0:x"}, Matrix(0, 1), SignalKind::Displacement);
    const RunOutput out = run_session(s, empty);
    EXPECT_EQ(out.forces.n_samples(), 0);
    EXPECT_EQ(out.timing.total, 0.0);
    EXPECT_EQ(out.timing.count, 0u);
}

TEST(Run, SampleRateMismatch) {
    IdentifySession s = session_setup(single_dof(1, 0, 1), NewmarkParams{}, 0.0, InputKind::Displacement);
    const SignalSeries meas(2e-4, 0.0, {"0:x"}, Matrix::Zero(3, 1), SignalKind::Displacement);
    EXPECT_EQ(code_of([&] { run_session(s, meas); }), Errc::SampleRateMismatch);
}

TEST(Run, KindMismatchRejected) {
    IdentifySession s = session_setup(single_dof(1, 0, 1), NewmarkParams{}, 0.0, InputKind::Displacement);
    const SignalSeries meas(1e-4, 0.0, {"0:x"}, Matrix::Zero(3, 1), SignalKind::Acceleration);
    EXPECT_EQ(code_of([&] { run_session(s, meas); }), Errc::InvalidArgument);
}

TEST(Run, ChannelsMatchedByLabel) {
    const PartitionedModel pm = vsense::testing::chain_model(3, {"2:x", "0:x"});
    NewmarkParams p;
    p.dt = 1e-4;
    const Matrix f = chirp_forces(100, p.dt, 2);
    const auto tr = simulate_measured_forces(pm, p, f);
    // Present the channels in the opposite order plus an extra column.
    Matrix cols(100, 3);
    cols.col(0) = tr.u.col(1);
    cols.col(1) = Vector::Constant(100, 7.0);
    cols.col(2) = tr.u.col(0);
    const SignalSeries meas(p.dt, p.dt, {"0:x", "junk", "2:x"}, cols, SignalKind::Displacement);
    IdentifySession s = session_setup(pm, p, 0.0, InputKind::Displacement);
    const RunOutput out = run_session(s, meas);
    EXPECT_EQ(out.forces.channels, (std::vector<std::string>{"2:x", "0:x"}));
    EXPECT_LE((out.forces.samples - f).cwiseAbs().maxCoeff(), 1e-8 * f.cwiseAbs().maxCoeff());
}
