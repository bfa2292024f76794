#pragma once

#include "vsense/metrics.hpp"
#include "vsense/numerics.hpp"
#include "vsense/partition.hpp"
#include "vsense/signals.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace vsense {

struct NewmarkParams {
    double beta = 0.25;
    double delta = 0.5;
    double dt = 1e-4;

    // Throws InvalidArgument for dt <= 0 or beta <= 0.
    void validate() const;
    // delta >= 1/2 and beta >= delta/2.
    bool unconditionally_stable() const;
};

// Newmark difference-formula coefficients for a fixed (beta, delta, dt).
struct NewmarkCoefficients {
    explicit NewmarkCoefficients(const NewmarkParams& p);

    double dt;
    double delta;
    double a0;  // 1 / (beta dt^2)
    double a1;  // delta / (beta dt)
    double a2;  // 1 / (beta dt)
    double a3;  // 1 / (2 beta) - 1
    double a4;  // delta / beta - 1
    double a5;  // dt (delta / (2 beta) - 1)
};

struct State {
    double t = 0.0;
    Vector u;
    Vector v;
    Vector a;

    static State zero(Index n, double t0 = 0.0);
    Index size() const { return u.size(); }
};

// K_eff = M / (beta dt^2) + delta C / (beta dt) + K
SymMatrix effective_stiffness(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k,
                              const NewmarkParams& p);

// Internal-force term built from the previous state:
// r = M (a0 u + a2 v + a3 a) + C (a1 u + a4 v + a5 a).
Vector internal_force(const SymMatrix& m, const SymMatrix& c, const NewmarkCoefficients& co,
                      const State& s);

// Conventional implicit Newmark-beta integrator used as the truth generator.
class ForwardIntegrator {
public:
    ForwardIntegrator(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k, const NewmarkParams& p);
    explicit ForwardIntegrator(const PartitionedModel& model, const NewmarkParams& p)
        : ForwardIntegrator(model.m(), model.c(), model.k(), p) {}

    // Consistent initial acceleration M a0 = f0 - C v0 - K u0.
    State initial_state(const Vector& u0, const Vector& v0, const Vector& f0, double t0 = 0.0) const;
    // Advance by dt under the load applied at t + dt.
    State step(const State& s, const Vector& force_next) const;

    Index size() const { return m_.size(); }
    const NewmarkParams& params() const { return params_; }

private:
    SymMatrix m_, c_, k_;
    NewmarkParams params_;
    NewmarkCoefficients co_;
    Factorization k_eff_;
};

State forward_step(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k, const NewmarkParams& p,
                   const State& s, const Vector& force_next);
State forward_step(const PartitionedModel& model, const NewmarkParams& p, const State& s,
                   const Vector& force_next);

enum class InputKind { Displacement, Acceleration };

std::string_view input_kind_name(InputKind k);
InputKind parse_input_kind(std::string_view name);

// Everything a session needs that does not change during the online loop.
// Immutable once built, so several sessions may share one instance.
struct IdentifySetup {
    PartitionedModel model;
    NewmarkParams params;
    NewmarkCoefficients coeffs{NewmarkParams{}};
    double alpha = 0.0;
    InputKind input_kind = InputKind::Displacement;

    Factorization k_eff;
    SymMatrix h;             // [K^m - K^c (K^u)^{-1} K^c^T]^{-1} of K_eff
    Matrix measured_map;     // measured-quantity increment per unit force (H or H / (beta dt^2))
    Matrix gain;             // (S^T S + alpha I)^{-1} S^T with S = measured_map
    Matrix response;         // K_eff^{-1} E_m: displacement increment per unit force, N x n_m
};

std::shared_ptr<const IdentifySetup> make_identify_setup(const PartitionedModel& model,
                                                         const NewmarkParams& params, double alpha,
                                                         InputKind kind);

struct StepResult {
    Vector force;         // identified load on the measured DOFs
    Vector displacement;  // breve order
    Vector velocity;
    Vector acceleration;
    Vector rhs;           // measured minus predicted (the Tikhonov right-hand side)
    double elapsed = 0.0; // s
};

class IdentifySession {
public:
    explicit IdentifySession(std::shared_ptr<const IdentifySetup> setup,
                             std::optional<State> initial = std::nullopt);

    // Consumes the measurement sampled at t + dt.
    StepResult step(const Vector& measured);

    const State& state() const { return state_; }
    const IdentifySetup& setup() const { return *setup_; }
    std::shared_ptr<const IdentifySetup> shared_setup() const { return setup_; }
    void reset(std::optional<State> initial = std::nullopt);

private:
    std::shared_ptr<const IdentifySetup> setup_;
    State state_;
    Vector work_r_;
};

IdentifySession session_setup(const PartitionedModel& model, const NewmarkParams& params, double alpha,
                              InputKind kind, std::optional<State> initial = std::nullopt);

struct RunOutput {
    SignalSeries forces;
    SignalSeries displacements;  // every breve coordinate
    std::vector<double> step_seconds;
    TimingStats timing;
};

// Steps through `measurements` in time order. Channels are matched to the
// measured labels by name.
RunOutput run_session(IdentifySession& session, const SignalSeries& measurements);

// Throws SampleRateMismatch unless |series_dt - dt| <= 1e-9 dt.
void check_sample_rate(double series_dt, double dt);

}  // namespace vsense
