#include "vsense/identify.hpp"

#include "vsense/error.hpp"
#include "vsense/regularize.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

namespace vsense {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

void NewmarkParams::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw Error(Errc::InvalidArgument, "dt must be positive");
    if (!(beta > 0) || !std::isfinite(beta)) throw Error(Errc::InvalidArgument, "beta must be positive");
    if (!std::isfinite(delta) || delta < 0) throw Error(Errc::InvalidArgument, "delta must be non-negative");
}

bool NewmarkParams::unconditionally_stable() const { return delta >= 0.5 && beta >= 0.5 * delta; }

NewmarkCoefficients::NewmarkCoefficients(const NewmarkParams& p)
    : dt(p.dt),
      delta(p.delta),
      a0(1.0 / (p.beta * p.dt * p.dt)),
      a1(p.delta / (p.beta * p.dt)),
      a2(1.0 / (p.beta * p.dt)),
      a3(1.0 / (2.0 * p.beta) - 1.0),
      a4(p.delta / p.beta - 1.0),
      a5(p.dt * (p.delta / (2.0 * p.beta) - 1.0)) {}

State State::zero(Index n, double t0) {
    State s;
    s.t = t0;
    s.u = Vector::Zero(n);
    s.v = Vector::Zero(n);
    s.a = Vector::Zero(n);
    return s;
}

SymMatrix effective_stiffness(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k,
                              const NewmarkParams& p) {
    p.validate();
    if (m.size() != k.size() || c.size() != k.size()) {
        throw Error(Errc::DimensionMismatch, "M, C and K sizes differ");
    }
    const NewmarkCoefficients co(p);
    return co.a0 * m + co.a1 * c + k;
}

Vector internal_force(const SymMatrix& m, const SymMatrix& c, const NewmarkCoefficients& co,
                      const State& s) {
    Vector r = m.dense() * (co.a0 * s.u + co.a2 * s.v + co.a3 * s.a);
    r.noalias() += c.dense() * (co.a1 * s.u + co.a4 * s.v + co.a5 * s.a);
    return r;
}

namespace {

State advance(const NewmarkCoefficients& co, const State& s, Vector u_next) {
    State n;
    n.t = s.t + co.dt;
    n.a = co.a0 * (u_next - s.u) - co.a2 * s.v - co.a3 * s.a;
    n.v = s.v + co.dt * ((1.0 - co.delta) * s.a + co.delta * n.a);
    n.u = std::move(u_next);
    return n;
}

void check_state(const State& s, Index n) {
    if (s.u.size() != n || s.v.size() != n || s.a.size() != n) {
        throw Error(Errc::DimensionMismatch, "state length does not match the model");
    }
}

}  // namespace

ForwardIntegrator::ForwardIntegrator(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k,
                                     const NewmarkParams& p)
    : m_(m), c_(c), k_(k), params_(p), co_(p) {
    const SymMatrix k_eff = effective_stiffness(m, c, k, p);
    try {
        k_eff_ = Factorization(k_eff);
    } catch (const Error& e) {
        throw Error(Errc::SingularEffectiveStiffness, e.what());
    }
    if (!p.unconditionally_stable()) {
        std::cerr << "warning: Newmark parameters beta=" << p.beta << " delta=" << p.delta
                  << " are not unconditionally stable\n";
    }
}

State ForwardIntegrator::initial_state(const Vector& u0, const Vector& v0, const Vector& f0, double t0) const {
    const Index n = size();
    if (u0.size() != n || v0.size() != n || f0.size() != n) {
        throw Error(Errc::DimensionMismatch, "initial conditions do not match the model");
    }
    State s;
    s.t = t0;
    s.u = u0;
    s.v = v0;
    s.a = Factorization(m_).solve(Vector(f0 - c_.dense() * v0 - k_.dense() * u0));
    return s;
}

State ForwardIntegrator::step(const State& s, const Vector& force_next) const {
    check_state(s, size());
    if (force_next.size() != size()) {
        throw Error(Errc::DimensionMismatch, "force vector length does not match the model");
    }
    Vector rhs = internal_force(m_, c_, co_, s);
    rhs += force_next;
    return advance(co_, s, k_eff_.solve(rhs));
}

State forward_step(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k, const NewmarkParams& p,
                   const State& s, const Vector& force_next) {
    return ForwardIntegrator(m, c, k, p).step(s, force_next);
}

State forward_step(const PartitionedModel& model, const NewmarkParams& p, const State& s,
                   const Vector& force_next) {
    return ForwardIntegrator(model, p).step(s, force_next);
}

std::string_view input_kind_name(InputKind k) {
    return k == InputKind::Displacement ? "displacement" : "acceleration";
}

InputKind parse_input_kind(std::string_view name) {
    if (name == "displacement") return InputKind::Displacement;
    if (name == "acceleration") return InputKind::Acceleration;
    throw Error(Errc::InvalidArgument, "unknown input kind '" + std::string(name) + "'");
}

std::shared_ptr<const IdentifySetup> make_identify_setup(const PartitionedModel& model,
                                                         const NewmarkParams& params, double alpha,
                                                         InputKind kind) {
    params.validate();
    if (!(alpha >= 0) || !std::isfinite(alpha)) throw Error(Errc::InvalidArgument, "alpha must be >= 0");
    if (model.n_measured() < 1) throw Error(Errc::InvalidPartition, "no measured DOFs");
    if (!params.unconditionally_stable()) {
        std::cerr << "warning: Newmark parameters beta=" << params.beta << " delta=" << params.delta
                  << " are not unconditionally stable\n";
    }

    auto s = std::make_shared<IdentifySetup>();
    s->model = model;
    s->params = params;
    s->coeffs = NewmarkCoefficients(params);
    s->alpha = alpha;
    s->input_kind = kind;

    const SymMatrix k_eff = effective_stiffness(model.m(), model.c(), model.k(), params);
    try {
        s->k_eff = Factorization(k_eff);
    } catch (const Error& e) {
        throw Error(Errc::SingularEffectiveStiffness, e.what());
    }

    const SymMatrix kmm(Matrix(model.measured(k_eff)));
    const SymMatrix kuu(Matrix(model.unmeasured(k_eff)));
    try {
        s->h = schur_complement_inverse(kmm, Matrix(model.coupling(k_eff)), kuu);
    } catch (const Error& e) {
        throw Error(Errc::SingularUnmeasuredBlock, e.what());
    }

    const Index nm = model.n_measured();
    Matrix em = Matrix::Zero(model.size(), nm);
    em.topRows(nm).setIdentity();
    s->response = s->k_eff.solve(em);

    s->measured_map = s->h.dense();
    if (kind == InputKind::Acceleration) s->measured_map *= s->coeffs.a0;
    s->gain = tikhonov_gain(s->measured_map, alpha);
    return s;
}

IdentifySession::IdentifySession(std::shared_ptr<const IdentifySetup> setup, std::optional<State> initial)
    : setup_(std::move(setup)) {
    if (!setup_) throw Error(Errc::InvalidArgument, "null identification setup");
    reset(std::move(initial));
}

void IdentifySession::reset(std::optional<State> initial) {
    const Index n = setup_->model.size();
    if (initial) {
        check_state(*initial, n);
        state_ = std::move(*initial);
    } else {
        state_ = State::zero(n);
    }
    work_r_.resize(n);
}

StepResult IdentifySession::step(const Vector& measured) {
    const auto start = std::chrono::steady_clock::now();
    const IdentifySetup& s = *setup_;
    const Index nm = s.model.n_measured();
    if (measured.size() != nm) {
        throw Error(Errc::DimensionMismatch, "expected " + std::to_string(nm) + " measured values, got " +
                                                 std::to_string(measured.size()));
    }
    if (!all_finite(measured)) throw Error(Errc::NonFiniteMeasurement, "measurement contains NaN or Inf");

    const NewmarkCoefficients& co = s.coeffs;
    work_r_.noalias() = s.model.m().dense() * (co.a0 * state_.u + co.a2 * state_.v + co.a3 * state_.a);
    work_r_.noalias() += s.model.c().dense() * (co.a1 * state_.u + co.a4 * state_.v + co.a5 * state_.a);
    Vector u_pred = s.k_eff.solve(work_r_);

    StepResult out;
    if (s.input_kind == InputKind::Displacement) {
        out.rhs = measured - u_pred.head(nm);
    } else {
        const Vector acc_pred = co.a0 * (u_pred.head(nm) - state_.u.head(nm)) - co.a2 * state_.v.head(nm) -
                                co.a3 * state_.a.head(nm);
        out.rhs = measured - acc_pred;
    }
    out.force.noalias() = s.gain * out.rhs;
    u_pred.noalias() += s.response * out.force;

    state_ = advance(co, state_, std::move(u_pred));
    out.displacement = state_.u;
    out.velocity = state_.v;
    out.acceleration = state_.a;
    out.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

IdentifySession session_setup(const PartitionedModel& model, const NewmarkParams& params, double alpha,
                              InputKind kind, std::optional<State> initial) {
    return IdentifySession(make_identify_setup(model, params, alpha, kind), std::move(initial));
}

void check_sample_rate(double series_dt, double dt) {
    if (!(std::abs(series_dt - dt) <= 1e-9 * std::abs(dt))) {
        throw Error(Errc::SampleRateMismatch, "measurement interval " + std::to_string(series_dt) +
                                                  " s differs from integrator step " + std::to_string(dt) + " s");
    }
}

namespace {

void check_measurement_kind(const SignalSeries& s, InputKind kind) {
    const SignalKind want = kind == InputKind::Displacement ? SignalKind::Displacement : SignalKind::Acceleration;
    if (s.kind != want) {
        throw Error(Errc::InvalidArgument, "measurement series holds " + std::string(signal_kind_name(s.kind)) +
                                               " but the session expects " +
                                               std::string(input_kind_name(kind)));
    }
}

}  // namespace

RunOutput run_session(IdentifySession& session, const SignalSeries& measurements) {
    const IdentifySetup& s = session.setup();
    const auto labels = s.model.measured_labels();
    RunOutput out;
    const Index n = measurements.n_samples();
    if (n > 0) {
        check_sample_rate(measurements.dt, s.params.dt);
        check_measurement_kind(measurements, s.input_kind);
    }
    const SignalSeries selected = n > 0 ? measurements.select(labels) : measurements;

    Matrix forces(n, s.model.n_measured());
    Matrix disp(n, s.model.size());
    out.step_seconds.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const StepResult r = session.step(selected.samples.row(i).transpose());
        forces.row(i) = r.force.transpose();
        disp.row(i) = r.displacement.transpose();
        out.step_seconds.push_back(r.elapsed);
    }
    out.forces = SignalSeries(s.params.dt, measurements.t0, labels, std::move(forces), SignalKind::Force);
    out.displacements =
        SignalSeries(s.params.dt, measurements.t0, s.model.labels(), std::move(disp), SignalKind::Displacement);
    out.timing = timing_stats(out.step_seconds);
    return out;
}

}  // namespace vsense
